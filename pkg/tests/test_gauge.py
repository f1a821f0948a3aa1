import unittest
from collections import Counter

import numpy as np
from hypothesis import given, settings, strategies as st

from minkpoly import algebra, gauge, hyperpolygon, involution
from minkpoly.errors import NoConvergence, NotFixed, NotOnComplexLevel, NotStable
from minkpoly.gauge import ChartKind, GaugeElement, SolverOptions
from minkpoly.hyperpolygon import HyperConfig, SubsetMask

ALPHA4 = np.array([1.0, 1.0, 2.0, 1.0])
ALPHA6 = np.array([1.0, 1.0, 1.0, 1.0, 3.1, 3.3])
seeds = st.integers(min_value=0, max_value=2 ** 31 - 1)


def normalized_point(alpha=ALPHA4, seed=5) -> HyperConfig:
    return gauge.kempf_ness_normalize(hyperpolygon.sample_complex_level(alpha, seed)).config


class TestGaugeElement(unittest.TestCase):
    """Group structure of K and K^C."""

    def setUp(self):
        self.rng = np.random.default_rng(0)

    def test_random_elements_are_well_formed(self):
        self.assertTrue(GaugeElement.random_compact(5, self.rng).is_well_formed(1e-10))
        g = GaugeElement.random_complex(5, self.rng)
        self.assertTrue(g.is_well_formed(1e-10))
        self.assertFalse(g.compact)

    def test_inverse_and_sign_quotient(self):
        g = GaugeElement.random_complex(4, self.rng)
        self.assertTrue(g.compose(g.inverse()).equivalent(GaugeElement.identity(4), 1e-10))
        flipped = GaugeElement(-g.A, -g.e, compact=False)
        self.assertTrue(g.equivalent(flipped))

    def test_action_respects_composition(self):
        cfg = hyperpolygon.sample_complex_level(ALPHA4, 2)
        g = GaugeElement.random_complex(4, self.rng)
        h = GaugeElement.random_complex(4, self.rng)
        twice = gauge.act(gauge.act(cfg, g), h)
        once = gauge.act(cfg, g @ h)
        np.testing.assert_allclose(twice.p, once.p, atol=1e-12)
        np.testing.assert_allclose(twice.q, once.q, atol=1e-12)

    def test_sign_pair_acts_identically(self):
        cfg = hyperpolygon.sample_complex_level(ALPHA4, 2)
        g = GaugeElement.random_compact(4, self.rng)
        a = gauge.act(cfg, g)
        b = gauge.act(cfg, GaugeElement(-g.A, -g.e))
        np.testing.assert_allclose(a.p, b.p, atol=1e-14)
        np.testing.assert_allclose(a.q, b.q, atol=1e-14)

    def test_size_mismatch(self):
        with self.assertRaises(ValueError):
            gauge.act(hyperpolygon.sample_complex_level(ALPHA4, 2), GaugeElement.identity(5))


class TestMomentMapEquivariance(unittest.TestCase):
    """Moment maps under the gauge action."""

    @settings(max_examples=10, deadline=None)
    @given(seeds)
    def test_compact_action_preserves_level_and_invariants(self, seed):
        cfg = normalized_point(seed=seed % 1000)
        g = GaugeElement.random_compact(4, np.random.default_rng(seed))
        moved = gauge.act(cfg, g)
        self.assertLess(hyperpolygon.real_residual(moved), 1e-7)
        self.assertTrue(gauge.gauge_invariants(moved).close_to(gauge.gauge_invariants(cfg)))

    @settings(max_examples=10, deadline=None)
    @given(seeds)
    def test_complex_action_preserves_complex_level(self, seed):
        cfg = hyperpolygon.sample_complex_level(ALPHA4, seed)
        moved = gauge.act(cfg, GaugeElement.random_complex(4, np.random.default_rng(seed)))
        self.assertLess(hyperpolygon.complex_residual(moved), 1e-10 * moved.scale() ** 2)

    @settings(max_examples=20, deadline=None)
    @given(seeds)
    def test_moment_maps_transform_by_conjugation(self, seed):
        rng = np.random.default_rng(seed)
        cfg = HyperConfig(rng.standard_normal((5, 2)) + 1j * rng.standard_normal((5, 2)),
                          rng.standard_normal((5, 2)) + 1j * rng.standard_normal((5, 2)), np.ones(5))

        g = GaugeElement.random_compact(5, rng)
        vector, scalars = hyperpolygon.mu_real(cfg)
        moved_vector, moved_scalars = hyperpolygon.mu_real(gauge.act(cfg, g))
        np.testing.assert_allclose(moved_scalars, scalars, atol=1e-10)
        np.testing.assert_allclose(algebra.vector_to_hermitian(moved_vector),
                                   np.linalg.inv(g.A) @ algebra.vector_to_hermitian(vector) @ g.A, atol=1e-10)

        h = GaugeElement.random_complex(5, rng)
        matrix, scalars = hyperpolygon.mu_complex(cfg)
        moved_matrix, moved_scalars = hyperpolygon.mu_complex(gauge.act(cfg, h))
        np.testing.assert_allclose(moved_scalars, scalars, atol=1e-10)
        np.testing.assert_allclose(moved_matrix, np.linalg.inv(h.A) @ matrix @ h.A, atol=1e-10)


class TestKempfNess(unittest.TestCase):
    """The solver moving points onto the real level set."""

    def test_converges_for_several_sizes(self):
        rng = np.random.default_rng(1)
        for n in range(4, 9):
            while True:
                alpha = rng.uniform(0.5, 2.0, n)
                if hyperpolygon.min_abs_epsilon(alpha)[0] > 1e-3:
                    break
            cfg = hyperpolygon.sample_complex_level(alpha, int(rng.integers(1000)))
            result = gauge.kempf_ness_normalize(cfg)
            self.assertLess(result.residual, 1e-8)
            self.assertLess(hyperpolygon.real_residual(result.config), 1e-8)
            self.assertLess(hyperpolygon.complex_residual(result.config), 1e-10)
            moved = gauge.act(cfg, result.gauge)
            np.testing.assert_allclose(moved.p, result.config.p, atol=1e-7)
            np.testing.assert_allclose(moved.q, result.config.q, atol=1e-7)

    def test_idempotent(self):
        first = gauge.kempf_ness_normalize(hyperpolygon.sample_complex_level(ALPHA4, 9))
        second = gauge.kempf_ness_normalize(first.config)
        self.assertEqual(second.iterations, 0)
        self.assertLess(abs(hyperpolygon.phi(second.config) - hyperpolygon.phi(first.config)), 1e-10)

    def test_orbit_has_one_normal_form_up_to_compact_gauge(self):
        cfg = normalized_point()
        moved = gauge.act(cfg, GaugeElement.random_complex(4, np.random.default_rng(3), scale=0.3))
        again = gauge.kempf_ness_normalize(moved).config
        self.assertTrue(gauge.gauge_invariants(again).close_to(gauge.gauge_invariants(cfg), 1e-6))

    def test_off_complex_level(self):
        cfg = hyperpolygon.sample_complex_level(ALPHA4, 4)
        cfg.p[0] += 0.1
        with self.assertRaises(NotOnComplexLevel):
            gauge.kempf_ness_normalize(cfg)

    def test_unstable_input(self):
        q = np.column_stack([np.ones(4), np.zeros(4)]).astype(complex)
        with self.assertRaises(NotStable):
            gauge.kempf_ness_normalize(HyperConfig(np.zeros_like(q), q, ALPHA4))

    def test_iteration_cap(self):
        cfg = hyperpolygon.sample_complex_level(ALPHA4, 4)
        with self.assertRaises(NoConvergence) as ctx:
            gauge.kempf_ness_normalize(cfg, SolverOptions(max_iters=0))
        self.assertEqual(ctx.exception.exit_code, 2)


class TestChartsAndWeights(unittest.TestCase):
    """Charts at circle-fixed points and the weights measured on them."""

    def test_xs_chart_round_trip(self):
        subset = SubsetMask.from_labels([1, 2, 3], 6)
        cfg = involution.sample_x_s_point(ALPHA6, subset, 0)
        chart = gauge.chart_at_fixed_point(cfg, ChartKind.XS, subset)
        offsets = 0.01 * np.exp(1j * np.arange(2 * len(chart.indices)))
        dz, dw = offsets[:len(chart.indices)], offsets[len(chart.indices):]
        near = chart.point(dz, dw)
        self.assertLess(hyperpolygon.complex_residual(near), 1e-12 * near.scale() ** 2)
        coords = chart.evaluate(near)
        np.testing.assert_allclose(coords.z, dz, atol=1e-10)
        np.testing.assert_allclose(coords.w, dw, atol=1e-10)

    def test_xs_weights(self):
        for labels in ([1, 2], [1, 2, 3], [1, 2, 3, 4]):
            subset = SubsetMask.from_labels(labels, 6)
            cfg = involution.sample_x_s_point(ALPHA6, subset, 2)
            report = gauge.measure_isotropy_weights(cfg, ChartKind.XS, subset)
            k = len(labels)
            expected = Counter({1: k - 2, -1: 5 - k, 2: 5 - k})
            self.assertEqual(report.weights, +expected)
            self.assertLess(report.residual, 1e-6)

    def test_polygon_weights(self):
        cfg = involution.sample_polygon_point(ALPHA6, 1)
        report = gauge.measure_isotropy_weights(cfg, ChartKind.POLYGON)
        self.assertEqual(report.weights, Counter({1: 3}))
        self.assertIn("(n-1)-|S|", report.note)

    def test_charts_ignore_compact_gauge(self):
        c, s = np.cos(0.1), np.sin(0.1)
        g = GaugeElement(np.array([[c, -s], [s, c]]) @ np.diag([np.exp(0.1j), np.exp(-0.1j)]),
                         np.exp(0.05j * np.arange(1, 7)))
        subset = SubsetMask.from_labels([1, 2, 3], 6)
        xs_point = involution.sample_x_s_point(ALPHA6, subset, 0)
        polygon_point = involution.sample_polygon_point(ALPHA6, 1)
        charts = [
            (xs_point, gauge.chart_at_fixed_point(xs_point, ChartKind.XS, subset)),
            (polygon_point, gauge.chart_at_fixed_point(polygon_point, ChartKind.POLYGON)),
        ]
        for cfg, chart in charts:
            np.testing.assert_allclose(chart.evaluate(gauge.act(cfg, g)).as_vector(),
                                       chart.evaluate(cfg).as_vector(), atol=1e-8)

    def test_xs_chart_moves_one_coordinate_per_outside_p(self):
        subset = SubsetMask.from_labels([1, 2, 3], 6)
        cfg = involution.sample_x_s_point(ALPHA6, subset, 0)
        chart = gauge.chart_at_fixed_point(cfg, ChartKind.XS, subset)
        k = int(np.flatnonzero(chart.flipped)[0])
        j = chart.indices[k]
        self.assertNotIn(j, subset)

        nudged = cfg.copy()
        nudged.p[j] += 1e-6 * np.array([1.0, 1j])
        delta = chart.evaluate(nudged).as_vector() - chart.evaluate(cfg).as_vector()
        self.assertGreater(abs(delta[k]), 1e-12)
        np.testing.assert_allclose(np.delete(delta, k), 0, atol=1e-12)

    def test_charts_need_fixed_points(self):
        cfg = normalized_point()
        with self.assertRaises(NotFixed):
            gauge.chart_at_fixed_point(cfg, ChartKind.POLYGON)
        with self.assertRaises(NotFixed):
            gauge.chart_at_fixed_point(cfg, ChartKind.XS)


if __name__ == "__main__":
    unittest.main()
