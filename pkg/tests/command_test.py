import os
import tempfile
import unittest
from unittest import mock

import resonancewrangler
from resonancewrangler import command, runfolder


class TestCommandRegistry(unittest.TestCase):

    def test_incomplete(self):
        def should_break():
            @command.register_command("test_incomplete")
            class TestIncompleteCommand(object):
                pass

        self.assertRaises(command.ImproperlyDefinedCommandError, should_break)

    def test_basic(self):
        @command.register_command("test_basic")
        class TestBasicCommand(object):
            @staticmethod
            def specify_args(argparse):
                pass

            def run(self, args):
                return 0

        self.assertEqual(TestBasicCommand.name, "test_basic")
        self.assertTrue(command.has_command("test_basic"))
        self.assertEqual(command.get_command("test_basic"), TestBasicCommand)

    def test_builtins(self):
        self.assertTrue(command.has_command("run"))
        self.assertTrue(command.has_command("plots"))
        self.assertRaises(command.InvalidCommandError, command.get_command, "no_such_command")


class TestMain(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.directory.cleanup()

    def _config(self, text):
        path = os.path.join(self.directory.name, "run.ini")
        with open(path, "w") as config_file:
            config_file.write(text)
        return path

    def test_usage(self):
        self.assertEqual(resonancewrangler.main([]), 2)
        self.assertEqual(resonancewrangler.main(["frobnicate"]), 2)

    def test_missing_config(self):
        self.assertEqual(resonancewrangler.main(["run", os.path.join(self.directory.name, "none.ini")]), 2)

    def test_unknown_experiment(self):
        path = self._config("[resonance]\nk = 1\n[experiment]\nname = no_such_experiment\n")
        output = os.path.join(self.directory.name, "out")
        self.assertEqual(resonancewrangler.main(["run", path, "--output-dir", output]), 2)
        self.assertFalse(os.path.exists(output))

    def test_resonance_mismatch(self):
        path = self._config("[resonance]\nlambda_target = 2.5\n[experiment]\nname = spectral_audit\n")
        output = os.path.join(self.directory.name, "out")
        self.assertEqual(resonancewrangler.main(["run", path, "--output-dir", output]), 1)

    def test_plots_needs_run_dir(self):
        self.assertEqual(resonancewrangler.main(["plots", self.directory.name]), 2)

    def test_output_dir_is_a_file(self):
        path = self._config("[resonance]\nk = 1\n[experiment]\nname = spectral_audit\n")
        output = os.path.join(self.directory.name, "taken")
        with open(output, "w") as out:
            out.write("x")
        self.assertEqual(resonancewrangler.main(["run", path, "--output-dir", output]), 2)

    def test_incomplete_run_folder(self):
        path = self._config("[resonance]\nk = 1\n[experiment]\nname = spectral_audit\n")
        output = os.path.join(self.directory.name, "out")
        broken = runfolder.IncompleteRunFolderError("%s is not a run folder" % output)
        with mock.patch.object(runfolder.RunFolder, "spawn", side_effect=broken):
            self.assertEqual(resonancewrangler.main(["run", path, "--output-dir", output]), 2)
