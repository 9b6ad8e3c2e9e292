"""Experiment presets that the run command can execute.

Each preset reproduces one result about periodic solutions at resonance and turns it into acceptance checks. Presets are classes decorated with @register_experiment('name'). They must define an instance method named run, which takes a Bench (the config, the run folder, its open manifest and lazily built numeric objects) and returns a list of Checks. They may define a string _description.

    preset = get_experiment('spectral_audit')
    checks = preset().run(bench)
"""

import logging

import numpy as np

from resonancewrangler import errors

log = logging.getLogger(__name__)

_registry = {}


class ImproperlyDefinedExperimentError(Exception):
    """Indicates that a class decorated with @register_experiment lacks a run method."""
    pass


class UnknownExperimentError(errors.ConfigurationError):
    """Indicates that the given experiment name does not have a registered preset."""
    pass


def register_experiment(name):
    """Class decorator: marks a class as the preset for a particular experiment name. Decorated classes get a name attribute."""
    def decorator(cls):
        if not hasattr(cls, "run"):
            raise ImproperlyDefinedExperimentError

        _registry[name] = cls
        cls.name = name

        return cls
    return decorator


def has_experiment(name):
    return name in _registry


def all_experiments():
    return sorted(_registry)


def get_experiment(name):
    """Gets the preset registered under a name, or raises UnknownExperimentError."""
    if has_experiment(name):
        return _registry[name]
    raise UnknownExperimentError("unknown experiment %r; known: %s" % (name, ", ".join(all_experiments())))


class Check(object):
    """One acceptance check: a name, a verdict and a one-line detail."""

    def __init__(self, name, passed, detail=""):
        self.name = name
        self.passed = bool(passed)
        self.detail = detail

    def line(self):
        return "%s %s: %s" % ("PASS" if self.passed else "FAIL", self.name, self.detail)

    def __repr__(self):
        return "Check(%r, %r)" % (self.name, self.passed)


class Bench(object):
    """What a preset works with: the config, the run folder and its manifest, one seeded generator and the numeric objects built from the config on first use."""

    def __init__(self, config, folder, mf):
        self.config = config
        self.folder = folder
        self.manifest = mf
        self.rng = np.random.default_rng(config.seed)
        self._problem = None
        self._matrix = None
        self._dec = None
        self._nl = None

    @property
    def problem(self):
        if self._problem is None:
            self._problem = self.config.build_problem()
        return self._problem

    @property
    def dec(self):
        if self._dec is None:
            self._dec = self.config.build_decomposition(self.problem)
        return self._dec

    @property
    def matrix(self):
        if self._matrix is None:
            from resonancewrangler import elliptic
            self._matrix = elliptic.assemble(self.problem)
        return self._matrix

    @property
    def nonlinearity(self):
        if self._nl is None:
            self._nl = self.config.build_nonlinearity(self.dec)
        return self._nl

    def setup(self, epsilon=1.0):
        return self.config.build_setup(self.dec, self.nonlinearity, epsilon)

    def seeds(self):
        return self.config.build_seeds(self.dec)

    def table(self, name, frame, description=""):
        self.folder.write_table(self.manifest, name, frame, description)

    def text(self, name, text, kind="text", description=""):
        self.folder.write_text(self.manifest, name, text, kind, description)


def write_summary(bench, checks):
    """Writes summary.txt: one PASS/FAIL line per check and the overall verdict. Returns True iff every check passed."""
    passed = all(check.passed for check in checks) and bool(checks)
    lines = ["experiment: %s" % bench.config.experiment, "seed: %d" % bench.config.seed]
    lines.extend(check.line() for check in checks)
    lines.append("overall: %s" % ("PASS" if passed else "FAIL"))
    bench.text("summary.txt", "\n".join(lines) + "\n", "summary", "acceptance checks")
    return passed


from resonancewrangler.experiment import spectral, existence, averaging, audit  # noqa: E402,F401  (registers the presets)
