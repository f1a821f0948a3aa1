import json
import os
import shutil
import tempfile
import unittest

import numpy as np

from minkpoly import correspond, hyperpolygon, minkowski, parser
from minkpoly.errors import ParseError, SchemaMismatch
from minkpoly.hyperpolygon import SubsetMask, WeightVector
from minkpoly.minkowski import MinkPolygon

ALPHA4 = [1.0, 1.0, 2.0, 1.0]


class TestLoading(unittest.TestCase):
    """Typed objects from JSON text."""

    def test_weights(self):
        loaded = parser.loads('{"alpha": [1, 1, 2, 1]}')
        self.assertEqual(loaded.kind, "weights")
        self.assertIsInstance(loaded.value, WeightVector)
        self.assertTrue(loaded.report["generic"])
        self.assertAlmostEqual(loaded.report["min_abs_epsilon"], 1.0)

    def test_non_generic_weights_still_load(self):
        loaded = parser.loads('{"alpha": [1, 1, 1, 1]}')
        self.assertFalse(loaded.report["generic"])

    def test_hyperpolygon(self):
        text = json.dumps({
            "alpha": [1, 1, 1, 1],
            "p": [[[0, 0], [0, 0]]] * 4,
            "q": [[[1, 0], [0, 0]], [[0, 0], [1, 0]], [[1, 0], [0, 0]], [[0, 0], [1, 0]]],
        })
        loaded = parser.loads(text)
        self.assertEqual(loaded.kind, "hyperpolygon")
        np.testing.assert_array_equal(loaded.value.q[1], [0, 1])
        self.assertIn("real_residual", loaded.report)
        self.assertEqual(loaded.report["complex_residual"], 0.0)

    def test_polygon_with_order(self):
        poly = minkowski.minkowski_quadrilateral(ALPHA4, 4.0, 0.3)
        payload = dict(parser.to_jsonable(poly), order=[2, 1, 3, 4])
        loaded = parser.loads(json.dumps(payload))
        self.assertEqual(loaded.kind, "polygon")
        self.assertEqual(loaded.value.order, (1, 0, 2, 3))
        self.assertTrue(loaded.report["valid"])
        self.assertEqual(loaded.report["violations"], [])

    def test_malformed_complex_pair(self):
        text = json.dumps({"alpha": [1, 1, 1, 1], "p": [[[0, 0, 0], [0, 0]]] * 4, "q": [[[1, 0], [0, 0]]] * 4})
        with self.assertRaises(ParseError) as ctx:
            parser.loads(text)
        self.assertIn("p[0][0]", str(ctx.exception))

    def test_bad_json_reports_line(self):
        with self.assertRaises(ParseError) as ctx:
            parser.loads('{\n  "alpha": [1, 1,\n}')
        self.assertEqual(ctx.exception.line, 3)
        self.assertEqual(ctx.exception.exit_code, 1)

    def test_schema_mismatches(self):
        with self.assertRaises(SchemaMismatch):
            parser.loads('{"sides": []}')
        with self.assertRaises(SchemaMismatch):
            parser.loads(json.dumps({"alpha": ALPHA4, "k1": 3, "k2": 2, "sides": [[0, 0, 1]] * 4}))
        with self.assertRaises(SchemaMismatch):
            parser.loads(json.dumps({"alpha": ALPHA4, "sides": [[0, 0, 1]] * 4}))
        with self.assertRaises(SchemaMismatch):
            parser.loads(json.dumps({"alpha": ALPHA4, "p": [[[0, 0], [0, 0]]] * 4}))
        with self.assertRaises(SchemaMismatch):
            parser.loads('{"alpha": [1, 1, 1]}')

    def test_booleans_are_not_numbers(self):
        with self.assertRaises(ParseError):
            parser.loads('{"alpha": [1, true, 2, 1]}')


class TestSaving(unittest.TestCase):
    """Files written by save load back unchanged."""

    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def test_hyperpolygon_file(self):
        cfg = hyperpolygon.sample_complex_level(ALPHA4, 12)
        path = os.path.join(self.tmp, "nested", "point.json")
        parser.save(cfg, path)
        loaded = parser.load(path)
        np.testing.assert_array_equal(loaded.value.p, cfg.p)
        np.testing.assert_array_equal(loaded.value.q, cfg.q)
        np.testing.assert_array_equal(loaded.value.alpha, cfg.alpha)

    def test_polygon_file_keeps_order(self):
        poly = MinkPolygon(minkowski.minkowski_quadrilateral(ALPHA4, 4.0).sides, 2, ALPHA4, (0, 2, 1, 3))
        path = os.path.join(self.tmp, "polygon.json")
        parser.save(poly, path)
        loaded = parser.load(path).value
        np.testing.assert_array_equal(loaded.sides, poly.sides)
        self.assertEqual(loaded.order, poly.order)

    def test_missing_file(self):
        with self.assertRaises(ParseError):
            parser.load(os.path.join(self.tmp, "absent.json"))


class TestEncoding(unittest.TestCase):
    """JSON forms of the toolkit's result types."""

    def test_complex_arrays_become_pairs(self):
        self.assertEqual(parser.to_jsonable(np.array([1 + 2j, -1j])), [[1.0, 2.0], [0.0, -1.0]])
        self.assertEqual(parser.to_jsonable(np.complex128(3 - 1j)), [3.0, -1.0])

    def test_subsets_and_numpy_scalars(self):
        payload = parser.to_jsonable({"subset": SubsetMask.from_labels([2, 4], 5), "n": np.int64(5)})
        self.assertEqual(payload, {"subset": [2, 4], "n": 5})

    def test_higgs_data(self):
        data = correspond.to_higgs(hyperpolygon.sample_complex_level([0.21, 0.33, 0.47, 0.38], 1))
        payload = json.loads(parser.dumps(data))
        self.assertEqual(set(payload), {"points", "beta", "flags", "residues", "alpha"})
        self.assertEqual(np.array(payload["residues"]).shape, (4, 2, 2, 2))
        self.assertEqual(len(payload["beta"]), 4)


if __name__ == "__main__":
    unittest.main()
