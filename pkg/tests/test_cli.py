import json
import os
import shutil
import tempfile
import unittest
from unittest.mock import patch

import numpy as np

from minkpoly import cli, involution, minkowski, parser
from minkpoly.config import Config
from minkpoly.hyperpolygon import HyperConfig, SubsetMask
from minkpoly.logger import RunLogger

ALPHA4 = [1.0, 1.0, 2.0, 1.0]
ALPHA6 = [1.0, 1.0, 1.0, 1.0, 3.1, 3.3]


class TestCli(unittest.TestCase):
    """End-to-end runs of the subcommands against temporary files."""

    def setUp(self):
        self.tmp = tempfile.mkdtemp()
        with patch.dict(os.environ, {"MINKPOLY_CONFIG_DIR": self.tmp}, clear=True):
            self.config = Config()
        patches = [
            patch("minkpoly.cli.get_config", return_value=self.config),
            patch("minkpoly.cli.setup_logging"),
        ]
        for p in patches:
            p.start()
            self.addCleanup(p.stop)

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def path(self, name):
        return os.path.join(self.tmp, name)

    def write(self, name, obj):
        parser.save(obj, self.path(name))
        return self.path(name)

    def run_json(self, *argv):
        out = self.path("out.json")
        code = cli.run_cli(list(argv) + ["--output", out])
        with open(out) as f:
            return code, json.load(f)

    def run_text(self, *argv):
        out = self.path("out.txt")
        code = cli.run_cli(list(argv) + ["--output", out])
        with open(out) as f:
            return code, f.read()

    def test_census(self):
        weights = self.write("weights.json", {"alpha": ALPHA4})
        code, report = self.run_json("census", "--input", weights)
        self.assertEqual(code, 0)
        self.assertEqual([c["label"] for c in report["components"]], ["M(alpha)", "Z_{1,2}", "Z_{1,4}", "Z_{2,4}"])
        self.assertEqual((report["compact"], report["noncompact"]), (1, 3))

    def test_census_csv(self):
        weights = self.write("weights.json", {"alpha": ALPHA4})
        code, text = self.run_text("census", "--input", weights, "--format", "csv")
        lines = text.strip().splitlines()
        self.assertEqual(code, 0)
        self.assertEqual(lines[0], "label,dimension,compact,poincare,phi_floor")
        self.assertEqual(len(lines), 5)

    def test_bend_sweep_csv(self):
        poly = self.write("poly.json", minkowski.minkowski_quadrilateral(ALPHA4, 4.0, 0.4))
        code, text = self.run_text("bend", "--input", poly, "--sweep", "64", "--format", "csv")
        self.assertEqual(code, 0)
        lines = text.strip().splitlines()
        self.assertEqual(lines[0], "theta,ell,closure_inf_norm,max_norm_error")
        self.assertEqual(len(lines), 65)
        ells = np.array([float(line.split(",")[1]) for line in lines[1:]])
        np.testing.assert_allclose(ells, 4.0, atol=1e-9)

    def test_bend_normalizes_first(self):
        moved = minkowski.act_polygon(minkowski.minkowski_quadrilateral(ALPHA4, 4.0), minkowski.random_isometry(
            np.random.default_rng(2)))
        poly = self.write("poly.json", moved)
        code, report = self.run_json("bend", "--input", poly)
        self.assertEqual(code, 0)
        self.assertAlmostEqual(report["ell"], 4.0, delta=1e-9)
        u = np.array(report["sides"])
        self.assertLess(np.hypot(*(u[0] + u[1])[:2]), 1e-9)

    def test_witness(self):
        weights = self.write("weights.json", {"alpha": ALPHA4})
        code, report = self.run_json("witness", "--input", weights, "--k1", "2", "--m-max", "3")
        self.assertEqual(code, 0)
        self.assertEqual(len(report["polygons"]), 4)
        self.assertEqual(report["ell"], sorted(report["ell"]))

    def test_compact_witness_fails(self):
        weights = self.write("weights.json", {"alpha": ALPHA4})
        code, report = self.run_json("witness", "--input", weights, "--k1", "1")
        self.assertEqual(code, 1)
        self.assertEqual(report["error"], "CompactCase")
        self.assertFalse(report["success"])

    def test_unstable_configuration(self):
        q = np.array([[1, 0], [0, 0], [0, 1], [1, 1]], dtype=complex)
        config = self.write("point.json", HyperConfig(np.zeros_like(q), q, ALPHA4))
        code, report = self.run_json("stability", "--input", config)
        self.assertEqual(code, 1)
        self.assertFalse(report["stable"])
        self.assertIsNone(report["straight_sets"])

    def test_input_errors(self):
        code, report = self.run_json("census")
        self.assertEqual((code, report["error"]), (1, "ConfigError"))

        weights = self.write("weights.json", {"alpha": ALPHA4})
        code, report = self.run_json("stability", "--input", weights)
        self.assertEqual((code, report["error"]), (1, "SchemaMismatch"))

        with open(self.path("broken.json"), "w") as f:
            f.write("{")
        code, report = self.run_json("census", "--input", self.path("broken.json"))
        self.assertEqual((code, report["error"]), (1, "ParseError"))

    def test_sample_then_normalize(self):
        weights = self.write("weights.json", {"alpha": ALPHA4})
        code, sampled = self.run_json("sample", "--input", weights, "--seed", "4")
        self.assertEqual(code, 0)
        self.write("sampled.json", sampled)

        code, report = self.run_json("normalize", "--input", self.path("sampled.json"))
        self.assertEqual(code, 0)
        self.assertLess(report["residual"], 1e-8)
        self.assertEqual(len(report["p"]), 4)

    def test_iteration_cap_exit_code(self):
        weights = self.write("weights.json", {"alpha": ALPHA4})
        self.run_json("sample", "--input", weights)
        code, report = self.run_json("normalize", "--input", self.path("out.json"), "--max-iters", "1",
                                     "--kn-tol", "1e-30")
        self.assertEqual(code, 2)
        self.assertEqual(report["error"], "NoConvergence")

    def test_z_point_round_trip(self):
        subset = SubsetMask.from_labels([1, 2, 3], 6)
        point = self.write("z.json", involution.sample_z_s_point(ALPHA6, subset, 3))

        code, report = self.run_json("classify", "--input", point)
        self.assertEqual(code, 0)
        self.assertEqual((report["kind"], report["subset"]), ("Z_S", [1, 2, 3]))
        self.assertAlmostEqual(report["phi_floor"], 2.2)

        code, polygon = self.run_json("convert", "--input", point, "--to", "minkowski")
        self.assertEqual(code, 0)
        self.assertTrue(polygon["valid"])
        self.assertEqual(polygon["k1"], 3)
        self.write("polygon.json", polygon)

        code, back = self.run_json("convert", "--input", self.path("polygon.json"), "--to", "hyper")
        self.assertEqual(code, 0)
        self.assertLess(back["real_residual"], 1e-8)

    def test_genericity_margin_from_environment(self):
        weights = self.write("weights.json", {"alpha": ALPHA4})
        with patch.dict(os.environ, {"MINKPOLY_CONFIG_DIR": self.tmp, "MINKPOLY_GENERICITY_MARGIN": "2.0"},
                        clear=True):
            strict = Config()
        with patch("minkpoly.cli.get_config", return_value=strict):
            code, report = self.run_json("census", "--input", weights)
            self.assertEqual((code, report["error"]), (1, "NonGeneric"))
            self.assertAlmostEqual(report["min_abs_epsilon"], 1.0)
            code, report = self.run_json("sample", "--input", weights)
            self.assertEqual((code, report["error"]), (1, "NonGeneric"))

        code, report = self.run_json("census", "--input", weights)
        self.assertEqual(code, 0)

    def test_csv_only_where_supported(self):
        weights = self.write("weights.json", {"alpha": ALPHA4})
        code, report = self.run_json("sample", "--input", weights, "--format", "csv")
        self.assertEqual((code, report["error"]), (1, "ConfigError"))

    @patch("minkpoly.cli.display_home_page")
    def test_no_arguments_shows_home_page(self, home):
        self.assertEqual(cli.run_cli([]), 0)
        home.assert_called_once()

    @patch("minkpoly.cli.display_history")
    def test_runs_are_recorded(self, show):
        weights = self.write("weights.json", {"alpha": ALPHA4})
        self.run_json("census", "--input", weights)

        history = RunLogger(self.config.log_dir).get_run_history()
        self.assertEqual(len(history), 1)
        self.assertEqual(history[0]["command"], "census")
        self.assertEqual(history[0]["exit_code"], 0)

        self.assertEqual(cli.run_cli(["history", "--limit", "5"]), 0)
        self.assertEqual(len(show.call_args[0][0]), 1)


class TestRunLogger(unittest.TestCase):
    """JSON run records."""

    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def test_newest_first_with_limit(self):
        run_logger = RunLogger(self.tmp)
        for k in range(3):
            run_logger.log_run("witness", {"k1": k}, 0, {"step": k})

        history = run_logger.get_run_history(limit=2)
        self.assertEqual([h["options"]["k1"] for h in history], [2, 1])

    def test_missing_directory(self):
        self.assertEqual(RunLogger(os.path.join(self.tmp, "absent")).get_run_history(), [])


if __name__ == "__main__":
    unittest.main()
