import argparse
import logging
import platform

import numpy as np
import pandas as pd
import scipy

import resonancewrangler
from resonancewrangler import config, experiment, runfolder
from resonancewrangler.command import register_command

log = logging.getLogger(__name__)


def versions():
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
        "resonancewrangler": resonancewrangler.__version__,
    }


def run_experiment(cfg):
    """Runs the experiment a loaded config describes into its output directory. Returns True iff every acceptance check passed."""
    preset = experiment.get_experiment(cfg.experiment)
    folder = runfolder.RunFolder.spawn(cfg.directory, {
        "experiment": cfg.experiment,
        "config": cfg.echo(),
        "seed": cfg.seed,
        "versions": versions(),
    })
    with folder.open_manifest() as mf:
        bench = experiment.Bench(cfg, folder, mf)
        log.info("running %s into %s", cfg.experiment, folder.fname)
        checks = preset().run(bench)
        passed = experiment.write_summary(bench, checks)
        mf.set("passed", passed)
    for check in checks:
        log.info(check.line())
    return passed


@register_command("run")
class RunCommand(object):

    _help = "Run the experiment described by a config file."

    _description = "Builds the problem, decomposition and nonlinearity a config file describes, runs its experiment preset and writes the manifest, the CSV tables and summary.txt into the output directory. Exits with 0 iff every acceptance check passed."

    @staticmethod
    def specify_args(parser):
        parser.add_argument("config", help="Path to the experiment config file.")
        parser.add_argument("--output-dir", dest="output_dir", default=None,
                            help="Write artifacts here instead of output.directory.")
        parser.add_argument("--seed", type=int, default=None,
                            help="Override run.seed.")
        parser.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS,
                            help="Log numeric progress at DEBUG level.")

    def run(self, args):
        cfg = config.ExperimentConfig.load(args.config)
        cfg.override(output_dir=args.output_dir, seed=args.seed)
        passed = run_experiment(cfg)
        print("%s: %s (%s)" % (cfg.experiment, "PASS" if passed else "FAIL", cfg.directory))
        return 0 if passed else 1
