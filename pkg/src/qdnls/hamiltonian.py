"""Quantum DNLS ring Hamiltonian: on-site energies, hopping, momentum blocks.

Model: bosons on a periodic f-site ring,

    H = -sum_s [ gamma1 a+_s a+_s a_s a_s + epsilon (a+_{s+1} a_s + a+_s a_{s+1}) ]
        + gamma2 sum_s a+_s a+_s a+_s a_s a_s a_s

so the zero-hopping energy of an occupation vector is
sum_s [-gamma1 n_s (n_s - 1) + gamma2 n_s (n_s - 1) (n_s - 2)].  The hermitian
conjugate applies to the hopping term only.  The site sum is read literally:
for f = 2 both bonds 1 -> 2 and 2 -> 1 appear, so the single physical bond
carries twice the coefficient.

Translation symmetry splits each number sector into momentum blocks.  The
block element between orbits r' and r at momentum k is

    sqrt(d_r / d_r') * sum_{u=0}^{d_r'-1} exp(i k u) <T^u rep_r'| H |rep_r>

with the Bloch convention of `basis` (phase exp(-i k t) on T^t |rep>).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .basis import (
    MomentumBasis,
    MomentumIndex,
    Occ,
    SectorOrbits,
    check_sector,
    enumerate_sector,
    momentum_basis,
    momentum_grid,
    sector_dimension,
)
from .eigensolve import Spectrum, eigh
from .errors import CapacityError, ValidationError

DEFAULT_DENSE_CAP = 4000
DENSE_CAP_ENV = "BREATHER_DENSE_CAP"

MODELS = ("h1", "h2")


def dense_cap() -> int:
    """Largest dense matrix dimension allowed; override with BREATHER_DENSE_CAP."""
    raw = os.environ.get(DENSE_CAP_ENV)
    if raw is None:
        return DEFAULT_DENSE_CAP
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    if cap <= 0:
        raise ValidationError(f"{DENSE_CAP_ENV} must be a positive integer, got {raw!r}")
    return cap


@dataclass(frozen=True)
class ModelParams:
    """Ring model parameters; model h1 is the gamma2 = 0 restriction of h2."""

    f: int
    n: int
    gamma1: float
    gamma2: float = 0.0
    epsilon: float = 0.0
    model: str = "h2"

    def __post_init__(self):
        check_sector(self.f, self.n)
        for name in ("gamma1", "gamma2", "epsilon"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v) or v < 0:
                raise ValidationError(f"{name} must be a finite non-negative number, got {v!r}")
        if self.model not in MODELS:
            raise ValidationError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.model == "h1" and self.gamma2 != 0.0:
            raise ValidationError("model h1 has no three-body term; set gamma2 = 0 or use model h2")


def diagonal_energy(state, params: ModelParams) -> float:
    """Zero-hopping energy of an occupation vector."""
    e = 0.0
    for c in state:
        e += -params.gamma1 * c * (c - 1) + params.gamma2 * c * (c - 1) * (c - 2)
    return e


def hop_element(src, s: int, direction: int):
    """Move one boson from site s to site s + direction (mod f).

    Returns (destination state, bosonic amplitude sqrt(n_s (n_t + 1))), or None
    when site s is empty.  The hopping operator carries an extra factor
    -epsilon per element.
    """
    if direction not in (1, -1):
        raise ValidationError(f"direction must be +1 or -1, got {direction!r}")
    f = len(src)
    if not 0 <= s < f:
        raise ValidationError(f"site index {s} outside ring of size {f}")
    ns = src[s]
    if ns == 0:
        return None
    t = (s + direction) % f
    occ = list(src)
    occ[s] -= 1
    occ[t] += 1
    return tuple(occ), math.sqrt(ns * (src[t] + 1))


def full_matrix(params: ModelParams) -> np.ndarray:
    """Dense Hamiltonian over the full (f, n) sector in enumeration order.

    Symmetry-free oracle path; refuses sectors above the dense cap.
    """
    dim = sector_dimension(params.f, params.n)
    cap = dense_cap()
    if dim > cap:
        raise CapacityError(f"sector dimension {dim} exceeds the dense cap {cap}")
    states = enumerate_sector(params.f, params.n)
    index = {s: i for i, s in enumerate(states)}
    h = np.zeros((dim, dim))
    for i, s in enumerate(states):
        h[i, i] = diagonal_energy(s, params)
        for site in range(params.f):
            for direction in (1, -1):
                hop = hop_element(s, site, direction)
                if hop is None:
                    continue
                dst, amp = hop
                h[index[dst], i] += -params.epsilon * amp
    return h


@dataclass
class MomentumBlock:
    """One momentum block of the Hamiltonian in the Bloch orbit basis."""

    k: MomentumIndex
    basis: MomentumBasis
    matrix: np.ndarray

    def __post_init__(self):
        if self.matrix.shape != (self.basis.dim, self.basis.dim):
            raise ValidationError("block matrix shape does not match its basis dimension")


def block_parts(params: ModelParams, k: MomentumIndex, sector: SectorOrbits | None = None):
    """Momentum basis, zero-hopping energies per orbit, and the Bloch hopping matrix.

    The hopping matrix is exactly Hermitian by symmetrized construction.
    """
    basis = momentum_basis(params.f, params.n, k, sector)
    dim = basis.dim
    cap = dense_cap()
    if dim > cap:
        raise CapacityError(f"momentum block dimension {dim} exceeds the dense cap {cap}")
    sec = basis.sector
    diag = np.array([diagonal_energy(orb.rep, params) for orb in basis.orbits])
    v = np.zeros((dim, dim), dtype=complex)
    f = params.f
    for col, gi in enumerate(basis.orbit_indices):
        orb = sec.orbits[gi]
        for site in range(f):
            for direction in (1, -1):
                hop = hop_element(orb.rep, site, direction)
                if hop is None:
                    continue
                dst, amp = hop
                gj, shift = sec.locate[dst]
                row = basis.local_index.get(gj)
                if row is None:
                    # destination orbit carries no weight at this momentum
                    continue
                dj = sec.orbits[gj].period
                v[row, col] += (-params.epsilon * amp
                                * math.sqrt(orb.period / dj)
                                * np.exp(2j * np.pi * k.l * shift / f))
    v = 0.5 * (v + v.conj().T)
    return basis, diag, v


def assemble_block(params: ModelParams, k: MomentumIndex, sector: SectorOrbits | None = None) -> MomentumBlock:
    """Hamiltonian block at momentum k over the Bloch orbit basis."""
    basis, diag, v = block_parts(params, k, sector)
    h = v
    h[np.diag_indices(basis.dim)] += diag
    return MomentumBlock(k=k, basis=basis, matrix=h)


@dataclass
class KSpectrum:
    """A momentum block together with its eigendecomposition."""

    k: MomentumIndex
    block: MomentumBlock
    spectrum: Spectrum


def momentum_spectra(params: ModelParams, want_vectors: bool = True, threads: int = 1,
                     sector: SectorOrbits | None = None,
                     grid: list[MomentumIndex] | None = None) -> list[KSpectrum]:
    """Assemble and diagonalize momentum blocks, ordered by grid label l.

    By default every momentum on the canonical grid is solved; pass a
    subset of grid labels to restrict the work.
    """
    if not isinstance(threads, int) or threads < 1:
        raise ValidationError(f"threads must be a positive integer, got {threads!r}")
    if sector is None:
        sector = SectorOrbits(params.f, params.n)
    if grid is None:
        grid = momentum_grid(params.f)

    def solve(kidx):
        block = assemble_block(params, kidx, sector)
        return KSpectrum(k=kidx, block=block, spectrum=eigh(block.matrix, want_vectors=want_vectors))

    if threads == 1:
        return [solve(kidx) for kidx in grid]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(solve, grid))
