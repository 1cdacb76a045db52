"""Pattern classification, band extraction and tagging, effective masses."""

import math
import warnings

import numpy as np
import pytest

from qdnls import (
    BandOverlapError,
    Classification,
    ModelParams,
    NumericalError,
    PatternClass,
    PTValidityWarning,
    ValidationError,
    band22_asymptotic,
    band_mass,
    classify_block,
    classify_state,
    effective_mass,
    extract_band,
    ground_state,
    mass_ratio_report,
    momentum_spectra,
)
from qdnls.basis import SectorOrbits, momentum_basis, momentum_grid
from qdnls.bands import adjacency_of, normalize_pattern, pattern_of


# ------------------------------------------------------------- pattern helpers


def test_pattern_of_collects_nonzero_counts():
    assert pattern_of((2, 0, 0, 2, 0)) == (2, 2)
    assert pattern_of((0, 2, 4, 0)) == (4, 2)
    assert pattern_of((1, 1, 1, 1)) == (1, 1, 1, 1)
    assert pattern_of((0, 0, 0)) == ()


def test_adjacency_tags_ring_neighbors():
    assert adjacency_of((2, 2, 0, 0, 0)) == "adjacent"
    assert adjacency_of((2, 0, 2, 0, 0)) == "separated"
    assert adjacency_of((2, 0, 0, 0, 2)) == "adjacent"   # wraps around the ring
    assert adjacency_of((4, 0, 0, 0, 0)) == "n/a"
    assert adjacency_of((2, 1, 1, 0, 0)) == "n/a"


def test_normalize_pattern_sorts_and_validates():
    assert normalize_pattern([2, 4]) == (4, 2)
    with pytest.raises(ValidationError):
        normalize_pattern([2, 0])
    with pytest.raises(ValidationError):
        normalize_pattern([])


def test_pattern_class_requires_consistent_adjacency():
    assert PatternClass((2, 4), "separated").label == "4+2"
    assert PatternClass((3,)).label == "3"
    with pytest.raises(ValidationError):
        PatternClass((2, 2))                 # two clumps need a tag
    with pytest.raises(ValidationError):
        PatternClass((4,), "adjacent")       # one clump cannot have one
    with pytest.raises(ValidationError):
        PatternClass((2, 2), "touching")


# -------------------------------------------------------------- classification


def test_pure_states_classify_with_full_weight():
    states = [(2, 0, 2, 0, 0), (2, 2, 0, 0, 0), (2, 1, 1, 0, 0)]
    cls = classify_state([1.0, 0.0, 0.0], states)
    assert cls.pattern == PatternClass((2, 2), "separated")
    assert cls.weight == pytest.approx(1.0)
    cls = classify_state([0.0, 1.0, 0.0], states)
    assert cls.pattern.adjacency == "adjacent"


def test_pure_bloch_state_classifies_by_orbit_representative():
    basis = momentum_basis(5, 6, momentum_grid(5)[2], SectorOrbits(5, 6))
    target = next(i for i, orb in enumerate(basis.orbits) if pattern_of(orb.rep) == (3, 3))
    vec = np.zeros(basis.dim)
    vec[target] = 1.0
    cls = classify_state(vec, basis)
    assert cls.pattern == PatternClass((3, 3), "adjacent")
    assert cls.weight == pytest.approx(1.0)


def test_even_split_stays_unclassified_at_half():
    # amplitudes of 1/2 keep both pattern weights at exactly 0.5
    states = [(2, 2, 0, 0), (0, 2, 2, 0), (2, 1, 1, 0), (1, 2, 1, 0)]
    cls = classify_state([0.5, 0.5, 0.5, 0.5], states)
    assert cls.pattern is None
    assert cls.weight == 0.5


def test_tie_above_threshold_breaks_deterministically():
    states = [(2, 2, 0, 0), (0, 2, 2, 0), (2, 1, 1, 0), (1, 2, 1, 0)]
    cls = classify_state([0.5, 0.5, 0.5, 0.5], states, threshold=0.4)
    assert cls.pattern == PatternClass((2, 2), "adjacent")


def test_classify_validates_inputs():
    states = [(2, 2, 0, 0), (2, 1, 1, 0)]
    with pytest.raises(ValidationError):
        classify_state([1.0, 0.0], states, threshold=0.0)
    with pytest.raises(ValidationError):
        classify_state([1.0, 0.0], states, threshold=1.2)
    with pytest.raises(ValidationError):
        classify_state([0.6, 0.6], states)          # not normalized
    with pytest.raises(ValidationError):
        classify_state([1.0, 0.0, 0.0], states)     # wrong length
    with pytest.raises(ValidationError):
        classify_state(np.eye(2), states)           # not a single vector
    # threshold 1.0 is allowed but nothing can strictly exceed it
    assert classify_state([1.0, 0.0], states, threshold=1.0).pattern is None


def test_classified_count_decreases_with_threshold():
    p = ModelParams(f=7, n=4, gamma1=1.0, gamma2=0.0, epsilon=1.0)
    ksp = momentum_spectra(p)[3]
    counts = []
    for threshold in (0.2, 0.4, 0.6, 0.8):
        out = classify_block(ksp.spectrum.eigenvectors, ksp.block.basis, threshold)
        counts.append(sum(1 for c in out if c.pattern is not None))
    assert counts == sorted(counts, reverse=True)
    assert counts[0] > counts[-1]


# ------------------------------------------------------------- band extraction


def test_pair_band_tags_one_line_and_a_continuum():
    p = ModelParams(f=7, n=4, gamma1=10.0, gamma2=0.0, epsilon=0.5)
    report = extract_band(p, (2, 2))
    for l, (selected, expected) in report.counts.items():
        assert (selected, expected) == (3, 3)
        points = report.points_at(l)
        assert sum(1 for q in points if q.tag == "line") == 1
        assert sum(1 for q in points if q.tag == "continuum") == 2
    assert min(q.weight for q in report.points) > 0.98
    # the line sits above the continuum for attractive gamma1
    for l in report.counts:
        line = [q for q in report.points_at(l) if q.tag == "line"][0]
        rest = [q.energy for q in report.points_at(l) if q.tag == "continuum"]
        assert line.energy > max(rest)


def test_pair_band_tracks_its_closed_form():
    p = ModelParams(f=7, n=4, gamma1=10.0, gamma2=0.0, epsilon=0.5)
    report = extract_band(p, (2, 2))
    assert report.pt_residuals is not None
    residuals = [v for v in report.pt_residuals.values() if v is not None]
    assert len(residuals) == 7
    assert max(residuals) < 2e-3


def test_band_without_closed_form_has_no_residuals():
    p = ModelParams(f=7, n=4, gamma1=10.0, gamma2=0.0, epsilon=0.5)
    report = extract_band(p, (3, 1))
    assert report.pt_residuals is None
    assert all(c == (6, 6) for c in report.counts.values())


def test_zero_hopping_band_collapses_to_merged():
    p = ModelParams(f=7, n=4, gamma1=10.0, gamma2=0.0, epsilon=0.0)
    report = extract_band(p, (2, 2))
    assert report.points
    assert all(q.tag == "merged" for q in report.points)
    assert all(q.energy == pytest.approx(-40.0) for q in report.points)
    assert all(q.weight == pytest.approx(1.0) for q in report.points)


def test_strong_hopping_raises_band_overlap():
    p = ModelParams(f=7, n=4, gamma1=1.0, gamma2=0.0, epsilon=1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        spectra = momentum_spectra(p)
        with pytest.raises(BandOverlapError):
            extract_band(p, (2, 2), spectra=spectra)
        rep = extract_band(p, (2, 2), on_overlap="warn", spectra=spectra)
    assert rep.overlap_notes
    assert any(found < want for found, want in rep.counts.values())


def test_too_strict_threshold_reports_overlap():
    p = ModelParams(f=7, n=4, gamma1=10.0, gamma2=0.0, epsilon=0.5)
    spectra = momentum_spectra(p)
    with pytest.raises(BandOverlapError):
        extract_band(p, (2, 2), threshold=0.995, spectra=spectra)


def test_extract_band_validates_pattern_and_inputs():
    p = ModelParams(f=5, n=4, gamma1=10.0, gamma2=0.0, epsilon=0.1)
    with pytest.raises(ValidationError):
        extract_band(p, (5, 1))               # wrong boson count
    with pytest.raises(ValidationError):
        extract_band(ModelParams(f=3, n=4, gamma1=10.0), (1, 1, 1, 1))
    with pytest.raises(ValidationError):
        extract_band(p, (2, 2), on_overlap="explode")
    values_only = momentum_spectra(p, want_vectors=False)
    # f = 5 also trips the small-ring warning before the missing vectors do
    with pytest.warns(PTValidityWarning), pytest.raises(ValidationError):
        extract_band(p, (2, 2), spectra=values_only)


def test_ground_state_is_the_single_clump_at_zero_momentum():
    p = ModelParams(f=7, n=4, gamma1=10.0, gamma2=0.0, epsilon=0.5)
    spectra = momentum_spectra(p)
    g = ground_state(spectra)
    assert g.l == 0
    assert g.energy == pytest.approx(-120.0333462948, abs=1e-9)
    assert g.classification.pattern == PatternClass((4,))
    with pytest.raises(ValidationError):
        ground_state([])
    with pytest.raises(ValidationError):
        ground_state(momentum_spectra(p, want_vectors=False))


# ------------------------------------------------------------ effective masses


def quadratic_samples(delta, curvature, points=11):
    ks = [j * delta for j in range(-(points // 2), points // 2 + 1)]
    return ks, [0.5 * curvature * k * k for k in ks]


def test_effective_mass_recovers_quadratic_curvature():
    ks, es = quadratic_samples(0.05, curvature=3.0)
    fit = effective_mass(ks, es)
    assert fit.mass == pytest.approx(1.0 / 3.0, rel=1e-12)
    assert fit.curvature_fd == pytest.approx(3.0, rel=1e-9)
    assert fit.curvature_fit == pytest.approx(3.0, rel=1e-9)


def test_effective_mass_accepts_shuffled_input():
    ks, es = quadratic_samples(0.05, curvature=-2.0)
    order = np.random.default_rng(7).permutation(len(ks))
    fit = effective_mass(np.array(ks)[order], np.array(es)[order])
    assert fit.mass == pytest.approx(-0.5, rel=1e-12)


def test_effective_mass_matches_asymptotic_line_band():
    # curvature of the bound-pair line is eps^2 / (gamma1 Gamma) exactly,
    # so the mass is gamma1 Gamma / eps^2
    for gamma2, want in ((0.0, -160.0), (7.5, 56.0)):
        p = ModelParams(f=19, n=4, gamma1=10.0, gamma2=gamma2, epsilon=0.5)
        delta = 2.0 * math.pi / 201.0
        ks = [j * delta for j in range(-5, 6)]
        es = [band22_asymptotic(p, k).line for k in ks]
        fit = effective_mass(ks, es)
        assert fit.mass == pytest.approx(want, rel=1e-6)


def test_effective_mass_validates_grids():
    delta = 0.05
    ks, es = quadratic_samples(delta, 1.0)
    with pytest.raises(ValidationError):
        effective_mass(ks[:4], es[:4])
    with pytest.raises(ValidationError):
        effective_mass([k + 0.5 * delta for k in ks], es)   # no k = 0 sample
    with pytest.raises(ValidationError):
        effective_mass([k + 2 * delta for k in ks[:5]], es[:5])   # zero at the edge
    bad = list(ks)
    bad[-4] += 0.3 * delta
    with pytest.raises(ValidationError):
        effective_mass(bad, es)
    coarse, ec = quadratic_samples(2.0 * math.pi / 9.0, 1.0, points=5)
    with pytest.raises(ValidationError):
        effective_mass(coarse, ec)
    with pytest.raises(ValidationError):
        effective_mass(ks, es[:-1])


def test_effective_mass_rejects_degenerate_dispersion():
    ks, _ = quadratic_samples(0.05, 1.0, points=5)
    with pytest.raises(NumericalError):
        effective_mass(ks, [5.0] * 5)                      # flat band
    with pytest.raises(NumericalError):
        effective_mass(ks, [3.0 * k for k in ks])          # pure slope
    with pytest.raises(NumericalError):
        effective_mass(ks, [0.0, 0.0, 1.0, 0.0, 0.0])      # estimates disagree


def test_band_mass_requires_the_requested_tag():
    single = ModelParams(f=17, n=2, gamma1=10.0, gamma2=0.0, epsilon=0.1)
    with pytest.raises(NumericalError):
        band_mass(single, (2,), "line")


def test_mass_ratio_approaches_line_coupling():
    report = mass_ratio_report(17, 10.0, epsilon=0.1)
    assert report.gamma_prediction == pytest.approx(-4.0)
    assert report.m2_star == pytest.approx(500.202, abs=0.1)
    assert report.m2_star > 0 and report.m22_star < 0
    assert report.ratio == pytest.approx(-4.0, rel=2e-3)
