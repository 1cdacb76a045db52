"""Second-order degenerate perturbation theory for two-clump breather bands.

At zero hopping, every occupation pattern {m, l} (a clump of m bosons and a
clump of l at some separation) is exactly degenerate across separations and,
through Bloch symmetrization, each momentum k hosts one small degenerate space
per pattern.  Treating the hopping as the perturbation and working to second
order in epsilon yields a small effective matrix per (pattern, k) whose
eigenvalues approximate the exact band.

Closed forms implemented here, for odd f = 2 sigma + 1:

* {2, 2}: sigma x sigma tridiagonal.  Uniform shift 8 eps^2 / (E2 - 2 E1),
  bulk hop kappa = exp(i k / 2) cos(k / 2) times 4 eps^2 / (E2 - 2 E1), an
  impurity Gamma = (3 gamma2 - 4 gamma1) / (gamma1 - 3 gamma2) on the adjacent
  class, and cos(sigma k) on the maximal-separation class where the two clumps
  interact around the ring.
* {4, 2}: 2 sigma x 2 sigma tridiagonal of ones scaled by -eps^2 / gamma1 plus
  a uniform shift D eps^2.  The separation-1 ends carry the impurity Gamma,
  and ring-closure corners p = 6 gamma1 exp(i k) / (gamma1 - 6 gamma2) connect
  |42> to |24>: two sqrt(12) hops through the |33> intermediate lying
  2 (gamma1 - 6 gamma2) away give 12 eps^2 / (-2 (gamma1 - 6 gamma2)), i.e.
  p times the bulk scale, with one Bloch winding phase.
* {3, 3}: diagonal (flat bands).  Uniform value 6 eps^2 / (3 gamma2 - 2 gamma1)
  with the adjacent class scaled by 1 + Gamma,
  Gamma = (9/2) (2 gamma2 - gamma1) / (gamma1 - 6 gamma2).

All three return only the order-eps^2 correction; add `pattern_energy` for
absolute energies.  `bw_second_order_block` builds the same object numerically
from single-boson hops for any degenerate family of classes and is the
independent check of the closed forms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .basis import MomentumIndex, SectorOrbits
from .errors import PTValidityWarning, ResonanceError, ResonanceWarning, ValidationError
from .hamiltonian import ModelParams, block_parts

RESONANCE_FLOOR_REL = 1e-6
WARN_EPS_FACTOR = 10.0


def resonance_floor(params: ModelParams) -> float:
    """Absolute floor below which a perturbative denominator counts as resonant."""
    return RESONANCE_FLOOR_REL * max(params.gamma1, params.gamma2, 1.0)


def _require(value: float, name: str, params: ModelParams) -> float:
    if abs(value) < resonance_floor(params):
        raise ResonanceError(name, value)
    if params.epsilon > 0 and abs(value) < WARN_EPS_FACTOR * params.epsilon:
        warnings.warn(
            f"denominator {name} = {value:.6g} is within {WARN_EPS_FACTOR:g} x epsilon; "
            "second-order results may be inaccurate",
            ResonanceWarning,
            stacklevel=3,
        )
    return value


def _sigma_for_pt(params: ModelParams) -> int:
    if params.f % 2 == 0 or params.f < 3:
        raise ValidationError(
            f"closed-form perturbation theory needs an odd ring size f = 2*sigma + 1, got f={params.f}"
        )
    sigma = (params.f - 1) // 2
    if sigma <= 2:
        warnings.warn(
            f"f = {params.f} leaves only sigma = {sigma} separation classes; "
            "second-order band structure is not reliable this small",
            PTValidityWarning,
            stacklevel=3,
        )
    return sigma


def _kval(k) -> float:
    return k.k if isinstance(k, MomentumIndex) else float(k)


def onsite_energy(s: int, gamma1: float, gamma2: float) -> float:
    """Zero-hopping energy of an isolated clump of s bosons."""
    if not isinstance(s, int) or s < 0:
        raise ValidationError(f"clump size must be a non-negative integer, got {s!r}")
    return -gamma1 * s * (s - 1) + gamma2 * s * (s - 1) * (s - 2)


def pattern_energy(pattern, params: ModelParams) -> float:
    """Zero-hopping energy of a multi-clump pattern, e.g. (2, 2) or (4, 2)."""
    return sum(onsite_energy(int(c), params.gamma1, params.gamma2) for c in pattern)


# ---------------------------------------------------------------- {2, 2} band


@dataclass(frozen=True)
class Coeffs22:
    """Coefficients of the {2, 2} effective matrix."""

    prefactor: float   # 4 eps^2 / (E2 - 2 E1), multiplies the structure matrix
    shift: float       # 8 eps^2 / (E2 - 2 E1), uniform diagonal shift
    impurity: float    # (3 gamma2 - 4 gamma1) / (gamma1 - 3 gamma2), adjacent class

    @staticmethod
    def kappa(k: float) -> complex:
        """Effective hop between neighboring separation classes."""
        return np.exp(0.5j * k) * math.cos(0.5 * k)

    @staticmethod
    def closure(k: float, sigma: int) -> float:
        """Ring-closure entry on the maximal-separation class."""
        return math.cos(sigma * k)


def coeffs22(params: ModelParams) -> Coeffs22:
    g1, g2, eps = params.gamma1, params.gamma2, params.epsilon
    pair_gap = _require(-2.0 * g1, "gamma1", params)          # E2 - 2 E1
    imp_den = _require(g1 - 3.0 * g2, "gamma1 - 3*gamma2", params)
    pref = 4.0 * eps * eps / pair_gap
    return Coeffs22(prefactor=pref, shift=2.0 * pref, impurity=(3.0 * g2 - 4.0 * g1) / imp_den)


def h22_matrix(params: ModelParams, k) -> np.ndarray:
    """Order-eps^2 effective matrix of the {2, 2} band at momentum k.

    Basis index j = 1 .. sigma is the clump separation; j = 1 is the adjacent
    class |22>.  Add pattern_energy((2, 2), params) for absolute energies.
    """
    sigma = _sigma_for_pt(params)
    c = coeffs22(params)
    kv = _kval(k)
    if sigma == 1:
        # adjacent and maximal separation coincide; keep the impurity entry only
        return np.array([[c.shift + c.prefactor * c.impurity]], dtype=complex)
    m = np.zeros((sigma, sigma), dtype=complex)
    m[0, 0] = c.impurity
    m[sigma - 1, sigma - 1] = c.closure(kv, sigma)
    kap = c.kappa(kv)
    # with the rightward translate and exp(-i k t) Bloch phase used throughout,
    # kappa sits on the superdiagonal and its conjugate below
    for j in range(sigma - 1):
        m[j + 1, j] = np.conj(kap)
        m[j, j + 1] = kap
    h = c.prefactor * m
    h[np.diag_indices(sigma)] += c.shift
    return h


@dataclass(frozen=True)
class AsymptoticBand22:
    """Infinite-ring {2, 2} band at one momentum: bound-pair line and continuum."""

    k: float
    line: float | None     # present iff |impurity| > cos(k/2)
    continuum_lo: float    # open interval: theta -> 0 and theta -> pi edges
    continuum_hi: float
    exists_all_k: bool     # line present at every k iff |impurity| > 1
    center: float          # zero-hopping energy 2 E2
    shift: float
    half_cos: float
    impurity: float

    def continuum(self, theta: float) -> float:
        """Unbound-pair energy at relative phase theta in (0, pi)."""
        return self.center + self.shift * (1.0 + self.half_cos * math.cos(theta))


def band22_asymptotic(params: ModelParams, k) -> AsymptoticBand22:
    """Closed-form infinite-f {2, 2} band at momentum k (folded into [-pi, pi])."""
    c = coeffs22(params)
    g1, g2 = params.gamma1, params.gamma2
    if abs(3.0 * g2 - 4.0 * g1) < resonance_floor(params):
        # impurity strength vanishes and the line formula degenerates
        raise ResonanceError("3*gamma2 - 4*gamma1 (line coupling)", 3.0 * g2 - 4.0 * g1)
    kv = _kval(k)
    kn = math.remainder(kv, 2.0 * math.pi)
    hc = math.cos(0.5 * kn)
    center = 2.0 * onsite_energy(2, g1, g2)
    line = None
    if abs(c.impurity) > hc:
        line = center + c.prefactor * (2.0 + c.impurity + hc * hc / c.impurity)
    edges = (center + c.shift * (1.0 + hc), center + c.shift * (1.0 - hc))
    return AsymptoticBand22(
        k=kn,
        line=line,
        continuum_lo=min(edges),
        continuum_hi=max(edges),
        exists_all_k=abs(c.impurity) > 1.0,
        center=center,
        shift=c.shift,
        half_cos=hc,
        impurity=c.impurity,
    )


# ---------------------------------------------------------------- {4, 2} band


@dataclass(frozen=True)
class Coeffs42:
    """Coefficients of the {4, 2} effective matrix."""

    shift: float        # D eps^2, uniform diagonal shift
    prefactor: float    # -eps^2 / gamma1, multiplies the structure matrix
    impurity: float     # Gamma on both adjacent ends
    closure_mag: float  # 6 gamma1 / (gamma1 - 6 gamma2)

    def closure(self, k: float) -> complex:
        """Ring-closure corner connecting |42> to |24>."""
        return self.closure_mag * np.exp(1j * k)


def coeffs42(params: ModelParams) -> Coeffs42:
    g1, g2, eps = params.gamma1, params.gamma2, params.epsilon
    _require(g1, "gamma1", params)
    d3 = _require(g1 - 3.0 * g2, "gamma1 - 3*gamma2", params)
    d6 = _require(g1 - 6.0 * g2, "gamma1 - 6*gamma2", params)
    du = -(2.0 / 3.0) * (5.0 * g1 - 9.0 * g2) / (g1 * d3)
    gam = (2.0 / 3.0) * (4.0 * g1 * g1 - 27.0 * g2 * g2) / (d3 * d6)
    return Coeffs42(shift=du * eps * eps, prefactor=-eps * eps / g1,
                    impurity=gam, closure_mag=6.0 * g1 / d6)


def h42_matrix(params: ModelParams, k) -> np.ndarray:
    """Order-eps^2 effective matrix of the {4, 2} band at momentum k.

    Basis index j = 1 .. 2 sigma is the clockwise separation from the 4-clump
    to the 2-clump, so j = 1 is |42> and j = 2 sigma is |24>.  Add
    pattern_energy((4, 2), params) for absolute energies.
    """
    sigma = _sigma_for_pt(params)
    c = coeffs42(params)
    dim = 2 * sigma
    m = np.zeros((dim, dim), dtype=complex)
    for j in range(dim - 1):
        m[j + 1, j] = 1.0
        m[j, j + 1] = 1.0
    m[0, 0] = c.impurity
    m[dim - 1, dim - 1] = c.impurity
    # With the rightward translate and exp(-i k t) Bloch phase used
    # throughout, the winding corner carries the conjugate phase in the
    # upper-right entry, mirroring the kappa orientation of the {2, 2} band.
    cl = c.closure(_kval(k))
    m[0, dim - 1] += np.conj(cl)
    m[dim - 1, 0] += cl
    h = c.prefactor * m
    h[np.diag_indices(dim)] += c.shift
    return h


def continuum42(params: ModelParams, theta: float) -> float:
    """Infinite-f {4, 2} continuum energy at relative phase theta; k independent."""
    g1, g2, eps = params.gamma1, params.gamma2, params.epsilon
    _require(g1, "gamma1", params)
    _require(g1 - 3.0 * g2, "gamma1 - 3*gamma2", params)
    zeroth = 24.0 * g2 - 14.0 * g1
    return zeroth + (2.0 * eps * eps / g1) * ((5.0 * g1 - 9.0 * g2) / (9.0 * g2 - 3.0 * g1)
                                              - math.cos(theta))


def continuum42_bounds(params: ModelParams) -> tuple[float, float]:
    """Open interval spanned by continuum42 over theta in (0, pi)."""
    edges = (continuum42(params, 0.0), continuum42(params, math.pi))
    return min(edges), max(edges)


# ---------------------------------------------------------------- {3, 3} band


@dataclass(frozen=True)
class Coeffs33:
    """Coefficients of the {3, 3} effective matrix."""

    prefactor: float   # 6 eps^2 / (3 gamma2 - 2 gamma1), uniform diagonal value
    impurity: float    # (9/2) (2 gamma2 - gamma1) / (gamma1 - 6 gamma2)


def coeffs33(params: ModelParams) -> Coeffs33:
    g1, g2, eps = params.gamma1, params.gamma2, params.epsilon
    den = _require(3.0 * g2 - 2.0 * g1, "3*gamma2 - 2*gamma1", params)
    d6 = _require(g1 - 6.0 * g2, "gamma1 - 6*gamma2", params)
    return Coeffs33(prefactor=6.0 * eps * eps / den,
                    impurity=4.5 * (2.0 * g2 - g1) / d6)


def h33_matrix(params: ModelParams, k=None) -> np.ndarray:
    """Order-eps^2 effective matrix of the {3, 3} band; diagonal and k independent.

    Basis index j = 1 .. sigma is the clump separation; the adjacent class
    |33> carries the impurity.  Add pattern_energy((3, 3), params) for
    absolute energies.
    """
    sigma = _sigma_for_pt(params)
    c = coeffs33(params)
    diag = np.full(sigma, c.prefactor, dtype=complex)
    diag[0] = c.prefactor * (1.0 + c.impurity)
    return np.diag(diag)


# ------------------------------------------------- numeric second-order block


def bw_second_order_block(params: ModelParams, k: MomentumIndex, classes,
                          sector: SectorOrbits | None = None) -> np.ndarray:
    """Second-order effective matrix over Bloch-symmetrized degenerate classes.

    Built numerically from single-boson hops: first-order couplings inside the
    class space plus sum_q V[:, q] V[q, :] / (E0 - E0_q) over every reachable
    state q outside it.  No closed forms enter; this is the reference the
    {2,2}, {4,2} and {3,3} matrices are validated against.
    """
    classes = list(classes)
    if not classes:
        raise ValidationError("need at least one degenerate class")
    if sector is None:
        sector = SectorOrbits(params.f, params.n)
    basis, diag, v = block_parts(params, k, sector)
    local_of_global = basis.local_index
    p_idx = []
    seen = set()
    for orb in classes:
        located = sector.locate.get(orb.rep)
        if located is None or located[1] != 0:
            raise ValidationError(f"{orb.rep!r} is not an orbit representative of this sector")
        j = local_of_global.get(located[0])
        if j is None:
            raise ValidationError(f"class {orb.rep} carries no weight at momentum l={k.l}")
        if j in seen:
            raise ValidationError(f"duplicate class {orb.rep}")
        seen.add(j)
        p_idx.append(j)
    p = np.array(p_idx, dtype=int)
    e0 = diag[p]
    scale = max(1.0, float(np.abs(diag).max()))
    if float(e0.max() - e0.min()) > 1e-9 * scale:
        raise ValidationError("classes are not degenerate at zero hopping")
    e_deg = float(e0[0])
    q = np.array([j for j in range(basis.dim) if j not in seen], dtype=int)
    v_pp = v[np.ix_(p, p)]
    h = v_pp
    if q.size:
        v_pq = v[np.ix_(p, q)]
        coupled = np.abs(v_pq).max(axis=0) > 1e-12 * max(params.epsilon, 1.0)
        qc = q[coupled]
        if qc.size:
            den = e_deg - diag[qc]
            worst_pos = int(np.argmin(np.abs(den)))
            worst = float(abs(den[worst_pos]))
            if worst < resonance_floor(params):
                rep = sector.orbits[basis.orbit_indices[qc[worst_pos]]].rep
                raise ResonanceError(f"E0(classes) - E0({rep})", float(den[worst_pos]))
            if params.epsilon > 0 and worst < WARN_EPS_FACTOR * params.epsilon:
                warnings.warn(
                    f"smallest intermediate gap {worst:.6g} is within "
                    f"{WARN_EPS_FACTOR:g} x epsilon",
                    ResonanceWarning,
                    stacklevel=2,
                )
            v_c = v_pq[:, coupled]
            h = v_pp + (v_c / den) @ v_c.conj().T
    return 0.5 * (h + h.conj().T)
