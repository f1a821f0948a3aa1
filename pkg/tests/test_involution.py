import unittest

import numpy as np
from hypothesis import given, settings, strategies as st

from minkpoly import gauge, hyperpolygon, involution
from minkpoly.errors import IdentityViolated, NotOnLevelSet, NotStable, NotZComponent
from minkpoly.gauge import GaugeElement
from minkpoly.hyperpolygon import SubsetMask
from minkpoly.involution import FixedKind

ALPHA4 = np.array([1.0, 1.0, 2.0, 1.0])
ALPHA6 = np.array([1.0, 1.0, 1.0, 1.0, 3.1, 3.3])
S123 = SubsetMask.from_labels([1, 2, 3], 6)


@st.composite
def generic_weights(draw, min_n=4, max_n=8):
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    rng = np.random.default_rng(draw(st.integers(min_value=0, max_value=2 ** 31 - 1)))
    while True:
        alpha = rng.uniform(0.5, 2.0, n)
        if hyperpolygon.min_abs_epsilon(alpha)[0] > 1e-3:
            return alpha


class TestClassifier(unittest.TestCase):
    """Recognising fixed points of (p, q) -> (-p, q)."""

    def test_involution_is_an_involution(self):
        cfg = hyperpolygon.sample_complex_level(ALPHA4, 0)
        twice = involution.involve(involution.involve(cfg))
        np.testing.assert_array_equal(twice.p, cfg.p)
        np.testing.assert_array_equal(twice.q, cfg.q)

    def test_z_s_points(self):
        for labels in ([1, 2], [1, 2, 3], [1, 2, 3, 4]):
            subset = SubsetMask.from_labels(labels, 6)
            cfg = involution.sample_z_s_point(ALPHA6, subset, 3)
            found = involution.classify_fixed(cfg)
            self.assertIs(found.kind, FixedKind.Z)
            self.assertEqual(found.subset, subset)
            self.assertTrue(found.fixed)
            self.assertTrue(involution.is_fixed_by_orbit(cfg))
            self.assertTrue(found.gauge.is_well_formed(1e-10))

    def test_diagonalising_gauge_moves_the_involution_back(self):
        cfg = involution.sample_z_s_point(ALPHA6, S123, 4)
        found = involution.classify_fixed(cfg)
        diagonal = gauge.act(cfg, found.gauge)
        sign = np.where(found.subset.as_bool(), 1j, -1j)
        flip = GaugeElement(np.diag([1j, -1j]), sign)
        back = gauge.act(involution.involve(diagonal), flip)
        np.testing.assert_allclose(back.p, diagonal.p, atol=1e-9)
        np.testing.assert_allclose(back.q, diagonal.q, atol=1e-9)

    def test_polygon_points(self):
        cfg = involution.sample_polygon_point(ALPHA6, 2)
        self.assertIs(involution.classify_fixed(cfg).kind, FixedKind.POLYGON)
        self.assertTrue(involution.is_fixed_by_orbit(cfg))

    def test_generic_points_are_not_fixed(self):
        cfg = gauge.kempf_ness_normalize(hyperpolygon.sample_complex_level(ALPHA6, 8)).config
        found = involution.classify_fixed(cfg)
        self.assertIs(found.kind, FixedKind.NOT_FIXED)
        self.assertFalse(involution.is_fixed_by_orbit(cfg))

    def test_needs_the_level_set(self):
        with self.assertRaises(NotOnLevelSet):
            involution.classify_fixed(hyperpolygon.sample_complex_level(ALPHA4, 0))


class TestZsData(unittest.TestCase):
    """Canonical forms and balance identities on Z_S."""

    def test_identities_hold(self):
        cfg = involution.sample_z_s_point(ALPHA6, S123, 5)
        magnitudes = involution.check_zs_identities(cfg, S123)
        self.assertEqual(set(magnitudes),
                         {"side_norms", "block_balance", "epsilon_balance", "block_sums", "diagonal_form"})
        self.assertLess(max(magnitudes.values()), 1e-9)

    def test_perturbed_side_breaks_side_norms(self):
        cfg = involution.sample_z_s_point(ALPHA6, S123, 5)
        canon = involution.canonical_zs_form(cfg, S123)
        canon.config.p[0, 1] *= 1.001
        with self.assertRaises(IdentityViolated) as ctx:
            involution.check_zs_identities(canon.config, canon.subset)
        self.assertEqual(ctx.exception.name, "side_norms")

    def test_polygon_point_is_not_z(self):
        cfg = involution.sample_polygon_point(ALPHA6, 2)
        with self.assertRaises(NotZComponent):
            involution.check_zs_identities(cfg, S123)

    def test_canonical_form_is_gauge_invariant(self):
        cfg = involution.sample_z_s_point(ALPHA6, S123, 6)
        moved = gauge.act(cfg, GaugeElement.random_compact(6, np.random.default_rng(1)))
        a = involution.canonical_zs_form(cfg, S123)
        b = involution.canonical_zs_form(moved, S123)
        np.testing.assert_allclose(a.config.p, b.config.p, atol=1e-9)
        np.testing.assert_allclose(a.config.q, b.config.q, atol=1e-9)
        self.assertEqual(a.order, (0, 1, 2, 3, 4, 5))

    def test_canonical_form_puts_subset_first(self):
        subset = SubsetMask.from_labels([1, 5], 6)
        alpha = np.array([1.0, 3.1, 3.3, 1.0, 1.0, 1.0])
        cfg = involution.sample_z_s_point(alpha, subset, 1)
        canon = involution.canonical_zs_form(cfg, subset)
        self.assertEqual(canon.order, (0, 4, 1, 2, 3, 5))
        self.assertEqual(canon.subset.labels(), (1, 2))
        np.testing.assert_allclose(canon.config.q[:2, 1], 0.0, atol=1e-9)
        self.assertTrue(np.all(canon.config.q[:2, 0].real > 0))

    def test_phi_floor_is_attained_on_x_s(self):
        x_point = involution.sample_x_s_point(ALPHA6, S123, 0)
        z_point = involution.sample_z_s_point(ALPHA6, S123, 0)
        floor = involution.phi_floor(S123, ALPHA6)
        self.assertAlmostEqual(floor, -0.5 * (3.0 - 7.4))
        self.assertAlmostEqual(hyperpolygon.phi(x_point), floor, delta=1e-9)
        self.assertGreater(hyperpolygon.phi(z_point), floor)

    def test_samplers_need_short_subsets(self):
        with self.assertRaises(NotStable):
            involution.sample_z_s_point(ALPHA6, SubsetMask.from_labels([5, 6], 6), 0)
        with self.assertRaises(NotStable):
            involution.sample_x_s_point(ALPHA6, SubsetMask.from_labels([1], 6), 0)
        with self.assertRaises(NotStable):
            involution.sample_polygon_point([1.0, 1.0, 1.0, 3.5], 0)


class TestCensus(unittest.TestCase):
    """Counting fixed components."""

    def test_four_components_for_the_square_example(self):
        result = involution.census(ALPHA4)
        self.assertEqual([c.label for c in result.components], ["M(alpha)", "Z_{1,2}", "Z_{1,4}", "Z_{2,4}"])
        self.assertEqual(result.compact, 1)
        self.assertEqual(result.noncompact, 3)
        self.assertEqual(result.components[1].poincare, [1])
        self.assertTrue(all(c.dimension == 2 for c in result.components))

    def test_compact_z_component(self):
        result = involution.census([1.0, 1.0, 1.0, 3.5])
        compact = [c for c in result.components if c.compact]
        self.assertEqual([c.label for c in compact], ["Z_{1,2,3}"])
        self.assertEqual(compact[0].poincare, [1, 0, 1])
        self.assertNotIn("M(alpha)", [c.label for c in result.components])

    @settings(max_examples=30, deadline=None)
    @given(generic_weights())
    def test_component_counts(self, alpha):
        n = alpha.size
        result = involution.census(alpha, threads=2)
        self.assertEqual(result.noncompact, 2 ** (n - 1) - (n + 1))
        self.assertEqual(result.compact, 1)

    def test_projective_poincare(self):
        self.assertEqual(involution.projective_poincare(0), [1])
        self.assertEqual(involution.projective_poincare(2), [1, 0, 1, 0, 1])


if __name__ == "__main__":
    unittest.main()
