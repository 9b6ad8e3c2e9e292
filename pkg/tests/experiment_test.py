import json
import os
import tempfile
import unittest

import pandas as pd

from resonancewrangler import config, experiment, runfolder
from resonancewrangler.command import plots, run

SPECTRAL = """
[problem]
grid_size = 31

[resonance]
k = 2

[experiment]
name = spectral_audit
"""

NONEXISTENCE = """
[problem]
grid_size = 15

[resonance]
k = 1

[nonlinearity]
family = kernel_constant

[experiment]
name = nonexistence

[solver]
seeds = 1, -1
random_seeds = 1
u_radius = 4
"""

LANDESMAN_LAZER = """
[problem]
grid_size = 15

[resonance]
k = 1

[nonlinearity]
family = arctan
forcing = 0.5

[experiment]
name = ll_criterion

[solver]
mode_cut = 15
mode_cut_check = 15
seeds = 0, 1, -1
"""

STRONG_RESONANCE = """
[problem]
grid_size = 15

[resonance]
k = 1

[nonlinearity]
family = strong_res
forcing = 0.5

[experiment]
name = sr_criterion

[solver]
mode_cut = 15
mode_cut_check = 15
"""

INDEX_FORMULA = """
[problem]
grid_size = 15

[resonance]
k = 1

[nonlinearity]
family = arctan
forcing = 0.5

[experiment]
name = index_formula

[solver]
mode_cut = 5
mode_cut_check = 15
b_radius = 1
r_grid = 5, 10, 20, 40
"""

AVERAGING = """
[problem]
grid_size = 15

[resonance]
k = 1

[nonlinearity]
family = arctan
forcing = 0.5

[experiment]
name = averaging_sweep

[solver]
mode_cut = 15
eps_list = 0.2, 0.1, 0.05
u_radius = 4
v_radius = 1
seeds = 1, -1
"""


class TestRegistry(unittest.TestCase):

    def test_presets(self):
        self.assertEqual(experiment.all_experiments(), [
            "averaging_sweep", "conditions_audit", "index_formula", "ll_criterion",
            "nonexistence", "spectral_audit", "sr_criterion"])
        self.assertRaises(experiment.UnknownExperimentError, experiment.get_experiment, "no_such_experiment")

    def test_incomplete(self):
        def should_break():
            @experiment.register_experiment("test_incomplete")
            class TestIncompleteExperiment(object):
                pass

        self.assertRaises(experiment.ImproperlyDefinedExperimentError, should_break)

    def test_check_line(self):
        self.assertEqual(experiment.Check("a", True, "fine").line(), "PASS a: fine")
        self.assertEqual(experiment.Check("b", 0, "").line(), "FAIL b: ")


class TestRuns(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.directory.cleanup()

    def _run(self, text):
        cfg = config.ExperimentConfig.from_string(text)
        cfg.override(output_dir=os.path.join(self.directory.name, cfg.experiment), seed=3)
        return run.run_experiment(cfg), cfg.directory

    def _summary(self, directory):
        with open(os.path.join(directory, "summary.txt")) as summary:
            return summary.read()

    def assertManifestComplete(self, directory):
        with open(os.path.join(directory, runfolder.MANIFEST_NAME)) as mf_file:
            record = json.load(mf_file)
        listed = set(entry["name"] for entry in record["files"])
        present = set(os.listdir(directory)) - set([runfolder.MANIFEST_NAME])
        self.assertEqual(listed, present)
        self.assertEqual(record["seed"], 3)
        self.assertIn("numpy", record["versions"])
        return record

    def test_spectral_audit(self):
        passed, directory = self._run(SPECTRAL)
        self.assertTrue(passed, self._summary(directory))
        record = self.assertManifestComplete(directory)
        self.assertEqual(record["experiment"], "spectral_audit")
        self.assertEqual(record["config"]["resonance"]["k"], "2")
        degrees = pd.read_csv(os.path.join(directory, "linear_degree.csv"))
        self.assertEqual(degrees["count"].tolist(), [1, -1, 1])
        spectrum = pd.read_csv(os.path.join(directory, "spectrum.csv"))
        self.assertEqual(spectrum["class"].value_counts()["kernel"], 1)
        self.assertTrue(self._summary(directory).endswith("overall: PASS\n"))

    def test_nonexistence(self):
        passed, directory = self._run(NONEXISTENCE)
        self.assertTrue(passed, self._summary(directory))
        self.assertManifestComplete(directory)
        table = pd.read_csv(os.path.join(directory, "nonexistence.csv"))
        self.assertEqual(len(table), 3)
        self.assertTrue((table["status"] != "certified").all())
        self.assertTrue((table["drift"] <= 1e-9).all())

        written, skipped = plots.emit_plot_scripts(directory)
        self.assertEqual(written, [])
        self.assertEqual(skipped, sorted(plots.SCRIPTS))

    def test_landesman_lazer(self):
        passed, directory = self._run(LANDESMAN_LAZER)
        summary = self._summary(directory)
        for name in ("regime", "certified_orbit", "index_sign", "index_sign_stable", "apriori_bound",
                     "periodicity", "degree_sum", "convergence_order"):
            self.assertIn("PASS %s:" % name, summary)
        orbit = pd.read_csv(os.path.join(directory, "orbit_summary.csv"))
        self.assertEqual(int(orbit["jacobian_sign"][0]), -1)

        written, skipped = plots.emit_plot_scripts(directory)
        self.assertEqual(written, ["orbit_heatmap.gp"])
        self.assertManifestComplete(directory)

    def test_wrong_family(self):
        passed, directory = self._run(NONEXISTENCE.replace("kernel_constant", "arctan"))
        self.assertFalse(passed)
        self.assertIn("FAIL family:", self._summary(directory))

    def test_strong_resonance(self):
        passed, directory = self._run(STRONG_RESONANCE)
        summary = self._summary(directory)
        for name in ("regime", "certified_orbit", "index_sign", "apriori_bound", "degree_sum"):
            self.assertIn("PASS %s:" % name, summary)
        conditions = pd.read_csv(os.path.join(directory, "conditions.csv"))
        self.assertEqual(conditions["holds"].tolist()[0], "yes")
        orbit = pd.read_csv(os.path.join(directory, "orbit_summary.csv"))
        self.assertEqual(int(orbit["jacobian_sign"][0]), -1)
        self.assertEqual(int(orbit["degree_sum"][0]), -1)
        self.assertManifestComplete(directory)

    def test_index_formula(self):
        passed, directory = self._run(INDEX_FORMULA)
        summary = self._summary(directory)
        for name in ("regime", "certified_orbit", "index_sign", "index_sign_stable", "degree_sum"):
            self.assertIn("PASS %s:" % name, summary)
        orbit = pd.read_csv(os.path.join(directory, "orbit_summary.csv"))
        self.assertEqual(int(orbit["mode_cut"][0]), 5)
        self.assertEqual(int(orbit["degree_sum"][0]), -1)

    def test_averaging_sweep(self):
        passed, directory = self._run(AVERAGING)
        summary = self._summary(directory)
        for name in ("averaged_degree", "q_decreasing", "sign_relation"):
            self.assertIn("PASS %s:" % name, summary)
        table = pd.read_csv(os.path.join(directory, "averaging.csv"))
        self.assertEqual(table["eps"].tolist(), [0.2, 0.1, 0.05])
        self.assertTrue((table["expected_degree"] == -1).all())
        trace = pd.read_csv(os.path.join(directory, "kernel_trace.csv"))
        self.assertTrue((trace["status"] == "certified").all())

        written, skipped = plots.emit_plot_scripts(directory)
        self.assertEqual(written, sorted(plots.SCRIPTS))
        self.assertEqual(skipped, [])
        self.assertManifestComplete(directory)


class TestDeterminism(unittest.TestCase):

    def test_same_seed_same_tables(self):
        with tempfile.TemporaryDirectory() as directory:
            outputs = []
            for name in ("first", "second"):
                cfg = config.ExperimentConfig.from_string(NONEXISTENCE.replace("random_seeds = 1", "random_seeds = 3"))
                cfg.override(output_dir=os.path.join(directory, name), seed=11)
                run.run_experiment(cfg)
                outputs.append(os.path.join(directory, name))

            with runfolder.RunFolder(outputs[0]).open_manifest(lock=False) as mf:
                tables = mf.search("kind", "csv", False)
            self.assertIn("nonexistence.csv", tables)
            for table in tables:
                with open(os.path.join(outputs[0], table), "rb") as first, \
                        open(os.path.join(outputs[1], table), "rb") as second:
                    self.assertEqual(first.read(), second.read(), table)
