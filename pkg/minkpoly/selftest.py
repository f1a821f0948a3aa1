"""
The invariant suite run by ``minkpoly selftest``.

Every check draws its randomness from the run seed and returns the measured
quantities; failures surface as AssertionError or a toolkit error.
"""
import functools
import logging
from typing import Dict, List

import numpy as np

from . import algebra, correspond, gauge, hyperpolygon, involution, minkowski
from .config import RunConfig
from .errors import CompactCase
from .executor import NamedCheck
from .hyperpolygon import SubsetMask

logger = logging.getLogger(__name__)


def random_generic_alpha(rng: np.random.Generator, n: int, margin: float = 1e-3) -> np.ndarray:
    while True:
        alpha = rng.uniform(0.5, 2.0, n)
        if hyperpolygon.min_abs_epsilon(alpha)[0] > margin:
            return alpha


def random_stable_alpha(rng: np.random.Generator, n: int) -> np.ndarray:
    """Generic weights with every singleton short, so M(alpha) is nonempty."""
    while True:
        alpha = random_generic_alpha(rng, n)
        if np.all(2 * alpha < alpha.sum()):
            return alpha


def check_short_census(run: RunConfig) -> Dict:
    shorts = hyperpolygon.short_census([1, 1, 2, 1], threads=run.threads)
    labels = sorted(s.labels() for s in shorts.sprime_sets())
    assert labels == [(1, 2), (1, 4), (2, 4)], labels
    return {"sprime": labels}


def check_component_counts(run: RunConfig, per_n: int = 10) -> Dict:
    rng = np.random.default_rng(run.seed)
    counted = {}
    for n in range(4, 11):
        for _ in range(per_n):
            result = involution.census(random_generic_alpha(rng, n), threads=run.threads)
            assert result.noncompact == 2 ** (n - 1) - (n + 1) and result.compact == 1
        counted[n] = 2 ** (n - 1) - (n + 1)
    return {"noncompact": counted}


def check_kempf_ness(run: RunConfig, per_n: int = 2) -> Dict:
    rng = np.random.default_rng(run.seed)
    options = gauge.SolverOptions(tol=run.kn_tol, max_iters=run.max_iters)
    worst, drift = 0.0, 0.0
    for n in range(4, 9):
        for _ in range(per_n):
            alpha = random_generic_alpha(rng, n)
            cfg = hyperpolygon.sample_complex_level(alpha, int(rng.integers(2 ** 31)))
            result = gauge.kempf_ness_normalize(cfg, options)
            again = gauge.kempf_ness_normalize(result.config, options)
            assert abs(hyperpolygon.phi(again.config) - hyperpolygon.phi(result.config)) < 1e-10
            worst = max(worst, result.residual)
            drift = max(drift, hyperpolygon.complex_residual(result.config))
    assert worst < run.kn_tol and drift < 1e-10
    return {"max_residual": worst, "max_complex_drift": drift}


def _mixed_points(run: RunConfig):
    rng = np.random.default_rng(run.seed + 1)
    alpha = np.array([1.0, 1.0, 1.0, 1.0, 3.1, 3.3])
    subset = SubsetMask.from_labels([1, 2, 3], 6)
    yield involution.sample_z_s_point(alpha, subset, int(rng.integers(2 ** 31))), True
    yield involution.sample_polygon_point(alpha, int(rng.integers(2 ** 31))), True
    cfg = hyperpolygon.sample_complex_level(alpha, int(rng.integers(2 ** 31)))
    yield gauge.kempf_ness_normalize(cfg).config, False


def check_classifier(run: RunConfig) -> Dict:
    disagreements = 0
    checked = 0
    for cfg, _ in _mixed_points(run):
        label = involution.classify_fixed(cfg).fixed
        disagreements += label != involution.is_fixed_by_orbit(cfg)
        checked += 1
    assert disagreements == 0, f"{disagreements} disagreements"
    return {"points": checked}


def check_zs_identities(run: RunConfig) -> Dict:
    alpha = np.array([1.0, 1.0, 1.0, 1.0, 3.1, 3.3])
    worst = {}
    for labels in ([1, 2], [1, 2, 3], [1, 2, 3, 4]):
        subset = SubsetMask.from_labels(labels, 6)
        cfg = involution.sample_z_s_point(alpha, subset, run.seed)
        found = involution.classify_fixed(cfg)
        magnitudes = involution.check_zs_identities(cfg, found.subset)
        for name, value in magnitudes.items():
            worst[name] = max(worst.get(name, 0.0), value)
    return worst


def check_correspondence(run: RunConfig) -> Dict:
    alpha = np.array([1.0, 1.0, 1.0, 1.0, 3.1, 3.3])
    subset = SubsetMask.from_labels([1, 2, 3], 6)
    cfg = involution.sample_z_s_point(alpha, subset, run.seed)
    canon = involution.canonical_zs_form(cfg, subset)
    poly = correspond.zs_to_minkowski(canon.config, canon.subset)
    report = minkowski.validate(poly)
    square = algebra.mink_inner(poly.sides, poly.sides)
    assert np.abs(square - poly.alpha ** 2).max() < 1e-10 and report.closure_residual < 1e-9
    back = correspond.minkowski_to_zs(poly)
    again = correspond.zs_to_minkowski(back, canon.subset)
    assert np.abs(again.sides - poly.sides).max() < 1e-8
    rebuilt = involution.canonical_zs_form(back, canon.subset).config
    assert np.abs(rebuilt.p - canon.config.p).max() < 1e-8 and np.abs(rebuilt.q - canon.config.q).max() < 1e-8
    return {"closure": report.closure_residual}


def check_isotropy(run: RunConfig) -> Dict:
    alpha = np.array([1.0, 1.0, 1.0, 1.0, 3.1, 3.3])
    measured = {}
    for labels in ([1, 2], [1, 2, 3], [1, 2, 3, 4]):
        subset = SubsetMask.from_labels(labels, 6)
        cfg = involution.sample_x_s_point(alpha, subset, run.seed)
        report = gauge.measure_isotropy_weights(cfg, gauge.ChartKind.XS, subset, seed=run.seed)
        k = subset.size
        expected = {1: k - 2, -1: 5 - k, 2: 5 - k}
        assert report.weights == {w: m for w, m in expected.items() if m}, report.weights
        measured[str(subset)] = dict(report.weights)
    cfg = involution.sample_polygon_point(alpha, run.seed)
    report = gauge.measure_isotropy_weights(cfg, gauge.ChartKind.POLYGON, seed=run.seed)
    assert report.weights == {1: 3}, report.weights
    measured["M(alpha)"] = dict(report.weights)
    return {"weights": measured, "note": report.note}


def check_bending(run: RunConfig) -> Dict:
    rng = np.random.default_rng(run.seed)
    alpha = np.array([1.0, 1.0, 2.0, 1.0])
    poly = minkowski.minkowski_quadrilateral(alpha, 4.0, 0.3)
    rows = minkowski.bend_sweep(poly, 64)
    ells = np.array([r[1] for r in rows])
    assert np.ptp(ells) < 1e-9 and max(r[2] for r in rows) < 1e-9 and max(r[3] for r in rows) < 1e-9
    floor = max(alpha[0] + alpha[1], alpha[2] + alpha[3])
    for _ in range(20):
        sample = minkowski.minkowski_quadrilateral(alpha, floor + rng.exponential(2.0), rng.uniform(0, 2 * np.pi))
        moved = minkowski.act_polygon(sample, minkowski.random_isometry(rng))
        assert minkowski.diagonal_length(moved, 2) >= floor - 1e-9
    aligned = minkowski.minkowski_quadrilateral(alpha, floor)
    assert abs(minkowski.diagonal_length(aligned, 2) - floor) < 1e-9
    return {"ell": float(ells[0])}


def check_diagonal_range(run: RunConfig) -> Dict:
    alpha = np.array([1.0, 1.5, 2.0, 1.2])
    lo, hi = hyperpolygon.diagonal_range(alpha)
    assert abs(lo - max(abs(alpha[0] - alpha[1]), abs(alpha[2] - alpha[3]))) < 1e-6
    assert abs(hi - min(alpha[0] + alpha[1], alpha[2] + alpha[3])) < 1e-6
    return {"range": [lo, hi]}


def check_witness(run: RunConfig) -> Dict:
    polygons = minkowski.noncompact_witness([1, 1, 2, 1], 2)
    ells = [minkowski.diagonal_length(p, 2) for p in polygons]
    assert all(b > a for a, b in zip(ells, ells[1:])) and ells[-1] > 1e3
    assert all(minkowski.validate(p, tol=1e-12).valid for p in polygons)
    try:
        minkowski.noncompact_witness([1, 1, 2, 1], 1)
    except CompactCase:
        pass
    else:
        raise AssertionError("k1 = 1 produced a witness")
    return {"last_ell": ells[-1], "count": len(ells)}


def check_closed_form_witness(run: RunConfig) -> Dict:
    worst_closure, norm_failures = 0.0, 0
    for m in range(2, 11):
        closure, norms = minkowski.closed_form_witness_errors(m)
        worst_closure = max(worst_closure, closure)
        norm_failures += bool(norms[1] > 1e-6 or norms[2] > 1e-6)
    assert worst_closure < 1e-12
    assert norm_failures == 9, "closed-form side norms unexpectedly hold"
    return {"closure": worst_closure, "norm_failures": norm_failures}


def check_higgs(run: RunConfig, samples: int = 20) -> Dict:
    rng = np.random.default_rng(run.seed)
    worst = {}
    for _ in range(samples):
        n = int(rng.integers(4, 9))
        cfg = hyperpolygon.sample_complex_level(random_generic_alpha(rng, n), int(rng.integers(2 ** 31)))
        data = correspond.to_higgs(cfg)
        for name, value in data.structure_residuals().items():
            worst[name] = max(worst.get(name, 0.0), value)
        lam = np.exp(1j * rng.uniform(0, 2 * np.pi))
        moved = correspond.to_higgs(hyperpolygon.circle_act(lam, cfg))
        assert np.abs(moved.residues - correspond.scale_residues(data, lam).residues).max() < 1e-12
    assert max(worst.values()) < 1e-10, worst
    return worst


def check_dimensions(run: RunConfig) -> Dict:
    rng = np.random.default_rng(run.seed)
    found = {}
    for n in (4, 5, 6):
        alpha = random_generic_alpha(rng, n)
        cfg = gauge.kempf_ness_normalize(hyperpolygon.sample_complex_level(alpha, run.seed)).config
        assert hyperpolygon.level_set_dimension(cfg) == 4 * (n - 3)
        k1 = n // 2
        sides = minkowski.noncompact_witness(np.ones(n) + 0.1 * np.arange(n), k1)[0]
        bent = minkowski.bend(sides, 0.7)
        assert minkowski.moduli_dimension(bent) == 2 * (n - 3)
        found[n] = 4 * (n - 3)
    return {"real_dim_X": found}


def check_lie_algebra(run: RunConfig, triples: int = 1000) -> Dict:
    rng = np.random.default_rng(run.seed)
    worst = 0.0
    for _ in range(triples):
        u, v, w = rng.standard_normal((3, 3))
        X, Y, Z = (algebra.su11_embed(x) for x in (u, v, w))
        bracket = algebra.commutator(X, Y) - algebra.su11_embed(algebra.mink_cross(u, v))
        jacobi = (algebra.commutator(X, algebra.commutator(Y, Z))
                  + algebra.commutator(Y, algebra.commutator(Z, X))
                  + algebra.commutator(Z, algebra.commutator(X, Y)))
        pairing = -2 * np.trace(X @ Y) - algebra.mink_inner(u, v)
        worst = max(worst, np.abs(bracket).max(), np.abs(jacobi).max(), abs(pairing))
    assert worst < 1e-12, worst
    return {"max_error": worst}


CHECKS = (
    ("short-census", check_short_census),
    ("component-counts", check_component_counts),
    ("kempf-ness", check_kempf_ness),
    ("classifier", check_classifier),
    ("zs-identities", check_zs_identities),
    ("correspondence", check_correspondence),
    ("isotropy-weights", check_isotropy),
    ("bending", check_bending),
    ("diagonal-range", check_diagonal_range),
    ("witness", check_witness),
    ("closed-form-witness", check_closed_form_witness),
    ("higgs-structure", check_higgs),
    ("dimensions", check_dimensions),
    ("lie-algebra", check_lie_algebra),
)


def build_checks(run: RunConfig) -> List[NamedCheck]:
    return [NamedCheck(name, functools.partial(fn, run)) for name, fn in CHECKS]
