"""Band extraction, line/continuum tagging, and effective masses.

Eigenstates are assigned to occupation patterns (the multiset of nonzero
site counts, e.g. (2, 2) or (4, 2)) by the squared-amplitude weight the
eigenvector carries on basis states of that pattern.  A state counts as
classified only when the best pattern's weight strictly exceeds the
threshold, so an even two-way split at threshold 0.5 stays unclassified.

Two-clump bands split further: an eigenvalue whose dominant basis state
has the clumps on neighbouring sites is tagged "line", the rest
"continuum".  Within a numerically degenerate cluster the tags are
meaningful only if they agree; conflicting tags collapse to "merged",
which is what happens to the whole band at epsilon = 0.

Effective masses come from the curvature of E(k) at k = 0, estimated two
ways (symmetric second difference and an exact quartic through the five
central grid points); the two must agree within 2 percent.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .basis import MomentumBasis, Occ, SectorOrbits, momentum_grid
from .eigensolve import eigh
from .errors import BandOverlapError, NumericalError, ResonanceError, ValidationError
from .hamiltonian import KSpectrum, ModelParams, momentum_spectra
from .perturbation import (
    coeffs22,
    h22_matrix,
    h33_matrix,
    h42_matrix,
    pattern_energy,
)

ADJACENCY_TAGS = ("adjacent", "separated", "n/a")

# tolerance for grouping eigenvalues into degenerate clusters, relative
# to the block's energy scale
DEGENERACY_RTOL = 1e-9

# five-point mass fits must stay within |k| <= 0.3 pi, i.e. f >= 17
MAX_MASS_SPACING = 2.0 * math.pi / 17.0
CURVATURE_AGREE_RTOL = 0.02


def pattern_of(state: Occ) -> tuple[int, ...]:
    """Multiset of nonzero site occupations, largest first."""
    return tuple(sorted((c for c in state if c), reverse=True))


def adjacency_of(state: Occ) -> str:
    """Clump adjacency on the ring; defined only for two-clump states."""
    sites = [s for s, c in enumerate(state) if c]
    if len(sites) != 2:
        return "n/a"
    gap = sites[1] - sites[0]
    return "adjacent" if gap == 1 or gap == len(state) - 1 else "separated"


def normalize_pattern(pattern) -> tuple[int, ...]:
    pat = tuple(sorted((int(c) for c in pattern), reverse=True))
    if not pat or any(c < 1 for c in pat):
        raise ValidationError(f"pattern entries must be positive integers, got {tuple(pattern)!r}")
    return pat


@dataclass(frozen=True)
class PatternClass:
    """An occupation pattern plus, for two clumps, their adjacency."""

    pattern: tuple[int, ...]
    adjacency: str = "n/a"

    def __post_init__(self):
        object.__setattr__(self, "pattern", normalize_pattern(self.pattern))
        if self.adjacency not in ADJACENCY_TAGS:
            raise ValidationError(f"unknown adjacency tag {self.adjacency!r}")
        two = len(self.pattern) == 2
        if two and self.adjacency == "n/a":
            raise ValidationError("two-clump patterns need an adjacent/separated tag")
        if not two and self.adjacency != "n/a":
            raise ValidationError("adjacency is defined only for two-clump patterns")

    @property
    def label(self) -> str:
        return "+".join(str(c) for c in self.pattern)


@dataclass(frozen=True)
class Classification:
    """Best pattern of an eigenvector; pattern is None when nothing clears
    the threshold."""

    pattern: PatternClass | None
    weight: float


def _basis_states(basis) -> list[Occ]:
    if isinstance(basis, MomentumBasis):
        return [orb.rep for orb in basis.orbits]
    return list(basis)


def classify_block(vectors, basis, threshold: float = 0.5) -> list[Classification]:
    """Classify each column of `vectors` over one basis.

    `basis` is either a MomentumBasis (one amplitude per orbit) or a plain
    sequence of occupation tuples matching the vector entries.  The weight
    of a pattern is the squared amplitude summed over basis states with
    that pattern; classification requires the best weight to exceed the
    threshold strictly, so an even split stays unclassified.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValidationError(f"threshold must lie in (0, 1], got {threshold!r}")
    states = _basis_states(basis)
    mat = np.asarray(vectors, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != len(states):
        raise ValidationError("vector length does not match the basis")
    amp2 = np.abs(mat) ** 2
    if mat.shape[1] and float(np.abs(amp2.sum(axis=0) - 1.0).max()) > 1e-8:
        raise ValidationError("vector is not normalized")
    patterns: dict[tuple[int, ...], int] = {}
    ids = np.empty(len(states), dtype=int)
    for i, state in enumerate(states):
        ids[i] = patterns.setdefault(pattern_of(state), len(patterns))
    plist = list(patterns)
    totals = np.zeros((len(plist), mat.shape[1]))
    np.add.at(totals, ids, amp2)
    out = []
    for j in range(mat.shape[1]):
        col = totals[:, j]
        weight = float(col.max())
        if not weight > threshold:
            out.append(Classification(None, weight))
            continue
        # deterministic tie break on the pattern itself
        pid = max(np.flatnonzero(col == weight), key=lambda i: plist[i])
        members = np.flatnonzero(ids == pid)
        dominant = members[int(np.argmax(amp2[members, j]))]
        out.append(Classification(PatternClass(plist[pid], adjacency_of(states[dominant])), weight))
    return out


def classify_state(vector, basis, threshold: float = 0.5) -> Classification:
    """Assign a single eigenvector to its dominant occupation pattern."""
    vec = np.asarray(vector, dtype=complex)
    if vec.ndim != 1:
        raise ValidationError("classify_state expects a single vector")
    return classify_block(vec[:, None], basis, threshold)[0]


# ------------------------------------------------------------ band extraction


@dataclass(frozen=True)
class BandPoint:
    """One selected eigenvalue of a band at one momentum."""

    l: int
    k: float
    index: int
    energy: float
    weight: float
    tag: str  # line | continuum | merged | n/a


@dataclass
class BandReport:
    """All eigenvalues attributed to one pattern, tagged per momentum."""

    pattern: tuple[int, ...]
    points: list[BandPoint]
    counts: dict[int, tuple[int, int]]  # l -> (selected, expected)
    pt_residuals: dict[int, float | None] | None  # None when no closed form applies
    overlap_notes: list[str] = field(default_factory=list)

    def points_at(self, l: int) -> list[BandPoint]:
        return [p for p in self.points if p.l == l]

    def tagged(self, tag: str) -> list[BandPoint]:
        return [p for p in self.points if p.tag == tag]


_PT_BUILDERS = {(2, 2): h22_matrix, (4, 2): h42_matrix, (3, 3): h33_matrix}


def _pt_band_eigenvalues(params: ModelParams, pattern) -> dict[int, np.ndarray] | None:
    """Per-momentum perturbative band energies, or None when no closed form
    applies (pattern without one, even f, resonant parameters)."""
    build = _PT_BUILDERS.get(tuple(pattern))
    if build is None:
        return None
    try:
        offset = pattern_energy(pattern, params)
        out = {}
        for k in momentum_grid(params.f):
            out[k.l] = np.sort(eigh(build(params, k)).eigenvalues) + offset
        return out
    except (ValidationError, ResonanceError):
        # even f or resonant couplings: the closed form does not apply
        return None


def _merge_degenerate_tags(energies: list[float], tags: list[str], scale: float) -> list[str]:
    """Collapse conflicting tags inside numerically degenerate clusters."""
    out = list(tags)
    start = 0
    for stop in range(1, len(energies) + 1):
        boundary = stop == len(energies) or energies[stop] - energies[stop - 1] > DEGENERACY_RTOL * scale
        if not boundary:
            continue
        cluster = range(start, stop)
        if len(set(out[i] for i in cluster)) > 1:
            for i in cluster:
                out[i] = "merged"
        start = stop
    return out


def extract_band(params: ModelParams, pattern, threshold: float = 0.5,
                 on_overlap: str = "raise",
                 spectra: list[KSpectrum] | None = None) -> BandReport:
    """Collect, per momentum, the eigenpairs dominated by one pattern.

    Two-clump patterns are tagged line/continuum by the adjacency of the
    dominant basis state; degenerate clusters with conflicting tags become
    "merged".  When fewer states than pattern classes are found at some
    momentum another band has mixed in; that raises BandOverlapError, or
    warns and reports the partial band when on_overlap="warn".  Closed
    perturbative band energies, when available, are compared against the
    selected exact ones in `pt_residuals`.
    """
    pat = normalize_pattern(pattern)
    if sum(pat) != params.n:
        raise ValidationError(
            f"pattern {pat} holds {sum(pat)} bosons, the sector has n = {params.n}")
    if len(pat) > params.f:
        raise ValidationError(f"pattern {pat} needs more than f = {params.f} sites")
    if on_overlap not in ("raise", "warn"):
        raise ValidationError(f"on_overlap must be 'raise' or 'warn', got {on_overlap!r}")
    two_clump = len(pat) == 2
    if spectra is None:
        spectra = momentum_spectra(params, want_vectors=True)
    sector = spectra[0].block.basis.sector
    class_orbits = [orb for orb in sector.orbits if pattern_of(orb.rep) == pat]

    points: list[BandPoint] = []
    counts: dict[int, tuple[int, int]] = {}
    notes: list[str] = []
    pt_eigs = _pt_band_eigenvalues(params, pat)
    pt_residuals: dict[int, float | None] | None = {} if pt_eigs is not None else None

    for ksp in spectra:
        if ksp.spectrum.eigenvectors is None:
            raise ValidationError("band extraction needs eigenvectors; solve with want_vectors=True")
        basis = ksp.block.basis
        expected = sum(1 for orb in class_orbits if ksp.k.compatible(orb))
        if basis.dim == 0:
            counts[ksp.k.l] = (0, expected)
            continue
        classified = classify_block(ksp.spectrum.eigenvectors, basis, threshold)
        selected: list[tuple[int, float, Classification]] = []
        for idx, cls in enumerate(classified):
            if cls.pattern is not None and cls.pattern.pattern == pat:
                selected.append((idx, float(ksp.spectrum.eigenvalues[idx]), cls))
        counts[ksp.k.l] = (len(selected), expected)
        if len(selected) < expected:
            note = (f"pattern {pat} at l = {ksp.k.l}: found {len(selected)} of "
                    f"{expected} states; another band overlaps or the threshold is too strict")
            if on_overlap == "raise":
                raise BandOverlapError(note)
            warnings.warn(note, stacklevel=2)
            notes.append(note)
        if two_clump:
            tags = ["line" if c.pattern.adjacency == "adjacent" else "continuum"
                    for _, _, c in selected]
        else:
            tags = ["n/a"] * len(selected)
        scale = max(1.0, float(np.abs(ksp.spectrum.eigenvalues).max())) if basis.dim else 1.0
        tags = _merge_degenerate_tags([e for _, e, _ in selected], tags, scale)
        for (idx, energy, cls), tag in zip(selected, tags):
            points.append(BandPoint(l=ksp.k.l, k=ksp.k.k, index=idx, energy=energy,
                                    weight=cls.weight, tag=tag))
        if pt_residuals is not None:
            reference = pt_eigs.get(ksp.k.l)
            if reference is not None and len(selected) == len(reference):
                exact = np.array([e for _, e, _ in selected])
                pt_residuals[ksp.k.l] = float(np.abs(exact - reference).max())
            else:
                pt_residuals[ksp.k.l] = None
    return BandReport(pattern=pat, points=points, counts=counts,
                      pt_residuals=pt_residuals, overlap_notes=notes)


# ------------------------------------------------------------- ground state


@dataclass(frozen=True)
class GroundState:
    l: int
    k: float
    energy: float
    classification: Classification


def ground_state(spectra: list[KSpectrum], threshold: float = 0.5) -> GroundState:
    """Global minimum over all momentum blocks, with its classification."""
    best: tuple[KSpectrum, int, float] | None = None
    for ksp in spectra:
        if ksp.spectrum.eigenvalues.size == 0:
            continue
        energy = float(ksp.spectrum.eigenvalues[0])
        if best is None or energy < best[2]:
            best = (ksp, 0, energy)
    if best is None:
        raise ValidationError("no eigenvalues to scan")
    ksp, idx, energy = best
    if ksp.spectrum.eigenvectors is None:
        raise ValidationError("ground-state classification needs eigenvectors")
    cls = classify_state(ksp.spectrum.eigenvectors[:, idx], ksp.block.basis, threshold)
    return GroundState(l=ksp.k.l, k=ksp.k.k, energy=energy, classification=cls)


# ---------------------------------------------------------- effective masses


@dataclass(frozen=True)
class MassFit:
    """Effective mass 1 / E''(0) with both curvature estimates."""

    mass: float
    curvature_fd: float
    curvature_fit: float


def effective_mass(ks, energies) -> MassFit:
    """Effective mass from E(k) samples on an even grid through k = 0.

    The curvature at zero is taken from the symmetric second difference
    and from an exact quartic through the five central points; the two
    must agree within 2 percent.  A significant odd component means the
    band is not extremal at k = 0 and is reported as an error.
    """
    k = np.asarray(ks, dtype=float)
    e = np.asarray(energies, dtype=float)
    if k.ndim != 1 or k.shape != e.shape:
        raise ValidationError("need matching one-dimensional k and E arrays")
    if k.size < 5:
        raise ValidationError("need at least five (k, E) samples around k = 0")
    order = np.argsort(k)
    k, e = k[order], e[order]
    center = int(np.argmin(np.abs(k)))
    if abs(k[center]) > 1e-12:
        raise ValidationError("samples must include k = 0")
    if center < 2 or center > k.size - 3:
        raise ValidationError("need two samples on each side of k = 0")
    kc = k[center - 2:center + 3]
    ec = e[center - 2:center + 3]
    steps = np.diff(kc)
    delta = float(steps.mean())
    if float(np.abs(steps - delta).max()) > 1e-9 * delta:
        raise ValidationError("momentum samples must be evenly spaced")
    if delta > MAX_MASS_SPACING * (1.0 + 1e-12):
        raise ValidationError(
            f"grid spacing {delta:.6g} too coarse for a five-point mass fit; need f >= 17")
    scale = max(1.0, float(np.abs(ec).max()))
    if float(ec.max() - ec.min()) < 1e-12 * scale:
        raise NumericalError("band is flat within precision; the effective mass diverges")
    curv_fd = float((ec[3] - 2.0 * ec[2] + ec[1]) / delta ** 2)
    slope_fd = float((ec[3] - ec[1]) / (2.0 * delta))
    if abs(slope_fd) > 0.1 * abs(curv_fd) * delta:
        raise NumericalError("dispersion is not extremal at k = 0; odd derivative dominates")
    # exact quartic through the five points, on the integer grid x = k / delta
    x = np.arange(-2.0, 3.0)
    coeff = np.linalg.solve(np.vander(x, 5, increasing=True), ec)
    curv_fit = float(2.0 * coeff[2] / delta ** 2)
    if abs(curv_fd - curv_fit) > CURVATURE_AGREE_RTOL * max(abs(curv_fd), abs(curv_fit)):
        raise NumericalError(
            f"curvature estimates disagree beyond {CURVATURE_AGREE_RTOL:.0%}: "
            f"second difference {curv_fd:.6g} vs quartic {curv_fit:.6g}")
    return MassFit(mass=1.0 / curv_fit, curvature_fd=curv_fd, curvature_fit=curv_fit)


@dataclass(frozen=True)
class EffectiveMassReport:
    """Masses of the single 2-clump band and the bound-pair line band."""

    m2_star: float
    m22_star: float
    ratio: float              # m22_star / (2 m2_star)
    gamma_prediction: float   # the line-coupling ratio the fit should match


def _single_tag_dispersion(report: BandReport, tag: str) -> tuple[list[float], list[float]]:
    ks: dict[int, float] = {}
    es: dict[int, float] = {}
    for p in report.points:
        if p.tag != tag:
            continue
        if p.l in ks:
            raise NumericalError(
                f"expected a single '{tag}' state per momentum for pattern {report.pattern}, "
                f"found several at l = {p.l}")
        ks[p.l] = p.k
        es[p.l] = p.energy
    missing = [l for l in report.counts if l not in ks]
    if missing:
        raise NumericalError(
            f"no '{tag}' state for pattern {report.pattern} at l = {sorted(missing)}")
    order = sorted(ks)
    return [ks[l] for l in order], [es[l] for l in order]


def band_mass(params: ModelParams, pattern, tag: str, threshold: float = 0.5) -> MassFit:
    """Mass fit of the unique tagged member of a pattern band."""
    report = extract_band(params, pattern, threshold=threshold)
    ks, es = _single_tag_dispersion(report, tag)
    return effective_mass(ks, es)


def mass_ratio_report(f: int, gamma1: float, gamma2: float = 0.0, epsilon: float = 0.0,
                      model: str = "h2", threshold: float = 0.5) -> EffectiveMassReport:
    """Compare the bound-pair line band mass with twice the single-pair mass.

    m2* comes from the one-state (2) band of the n = 2 sector, m22* from
    the line part of the (2, 2) band at n = 4.  For weak hopping the
    ratio m22* / (2 m2*) approaches the impurity coupling ratio of the
    pair-band closed form.
    """
    single = ModelParams(f=f, n=2, gamma1=gamma1, gamma2=gamma2, epsilon=epsilon, model=model)
    pair = ModelParams(f=f, n=4, gamma1=gamma1, gamma2=gamma2, epsilon=epsilon, model=model)
    m2 = band_mass(single, (2,), "n/a", threshold).mass
    m22 = band_mass(pair, (2, 2), "line", threshold).mass
    return EffectiveMassReport(m2_star=m2, m22_star=m22, ratio=m22 / (2.0 * m2),
                               gamma_prediction=coeffs22(pair).impurity)
