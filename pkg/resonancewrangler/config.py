"""Experiment configuration: one flat key = value file per experiment.

    [problem]
    domain = interval
    length = pi
    grid_size = 63

    [resonance]
    k = 1

    [nonlinearity]
    family = arctan
    forcing = 0.5

    [experiment]
    name = ll_criterion

Keys may be dotted (coefficient.kind). Real values accept pi, 2*pi, pi/2 and the like; lists are comma-separated. Every range violation raises ConfigurationError naming the offending section.key.
"""

import configparser
import logging
import math
import os
import re

import numpy as np

from resonancewrangler import elliptic, errors, evolve, nonlinearity
from resonancewrangler.nonlinearity import families

log = logging.getLogger(__name__)

SECTIONS = ("problem", "resonance", "nonlinearity", "time", "experiment", "solver", "output", "run")
DEFAULT_SEED = 20120
DEFAULT_MODE_CUT = 64

_FACTOR = re.compile(r"^\s*([+-]?)\s*(pi|[0-9.]+(?:[eE][+-]?[0-9]+)?)\s*$")


def parse_real(text, key="value"):
    """Parses a real number written as a product or quotient of decimals and pi, e.g. 2*pi or pi/2."""
    tokens = re.split(r"([*/])", str(text).strip())
    value = None
    operator = "*"
    for token in tokens:
        if token in ("*", "/"):
            operator = token
            continue
        match = _FACTOR.match(token)
        if not match:
            raise errors.ConfigurationError("%s: cannot read %r as a real number" % (key, text))
        try:
            factor = math.pi if match.group(2) == "pi" else float(match.group(2))
        except ValueError:
            raise errors.ConfigurationError("%s: cannot read %r as a real number" % (key, text))
        if match.group(1) == "-":
            factor = -factor
        if value is None:
            value = factor
        elif operator == "*":
            value *= factor
        elif factor == 0:
            raise errors.ConfigurationError("%s: division by zero in %r" % (key, text))
        else:
            value /= factor
    if value is None or not math.isfinite(value):
        raise errors.ConfigurationError("%s: cannot read %r as a real number" % (key, text))
    return value


def parse_list(text, key="value", item=parse_real):
    items = [part for part in str(text).split(",") if part.strip()]
    return [item(part, key) for part in items]


def parse_int(text, key="value"):
    try:
        return int(str(text).strip())
    except ValueError:
        raise errors.ConfigurationError("%s: expected an integer, got %r" % (key, text))


def _param_value(text, key):
    try:
        return parse_real(text, key)
    except errors.ConfigurationError:
        return str(text).strip()


class ExperimentConfig(object):
    """A validated experiment configuration and the builders that turn it into numeric objects."""

    def __init__(self, parser, source="<string>"):
        self._parser = parser
        self._source = source
        unknown = [name for name in parser.sections() if name not in SECTIONS]
        if unknown:
            raise errors.ConfigurationError("%s: unknown sections %s" % (source, ", ".join(unknown)))
        self._read_problem()
        self._read_resonance()
        self._read_nonlinearity()
        self._read_time()
        self._read_experiment()
        self._read_solver()
        self._read_output()
        self.seed = self._int("run", "seed", DEFAULT_SEED)

    @classmethod
    def load(cls, path):
        """Reads and validates a config file. Raises ConfigurationError if it is missing or invalid."""
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path, encoding="utf_8") as config_file:
                parser.read_file(config_file)
        except OSError as e:
            raise errors.ConfigurationError("cannot read config %s: %s" % (path, e))
        except configparser.Error as e:
            raise errors.ConfigurationError("malformed config %s: %s" % (path, e))
        return cls(parser, path)

    @classmethod
    def from_string(cls, text, source="<string>"):
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read_string(text)
        except configparser.Error as e:
            raise errors.ConfigurationError("malformed config %s: %s" % (source, e))
        return cls(parser, source)

    # Raw access.

    def _raw(self, section, key, default=None):
        if self._parser.has_option(section, key):
            return self._parser.get(section, key)
        return default

    def _real(self, section, key, default=None):
        raw = self._raw(section, key)
        return default if raw is None else parse_real(raw, "%s.%s" % (section, key))

    def _int(self, section, key, default=None):
        raw = self._raw(section, key)
        return default if raw is None else parse_int(raw, "%s.%s" % (section, key))

    def _list(self, section, key, default, item=parse_real):
        raw = self._raw(section, key)
        return list(default) if raw is None else parse_list(raw, "%s.%s" % (section, key), item)

    def _fail(self, key, msg):
        raise errors.ConfigurationError("%s: %s %s" % (self._source, key, msg))

    # Sections.

    def _read_problem(self):
        self.domain = self._raw("problem", "domain", "interval")
        if self.domain == "interval":
            self.lengths = (self._real("problem", "length", math.pi),)
        elif self.domain == "rectangle":
            self.lengths = tuple(self._list("problem", "lengths", (math.pi, math.pi)))
            if len(self.lengths) != 2:
                self._fail("problem.lengths", "must hold two values")
        else:
            self._fail("problem.domain", "must be interval or rectangle, got %r" % self.domain)
        if min(self.lengths) <= 0:
            self._fail("problem.length", "must be positive")

        self.grid_size = self._int("problem", "grid_size", 63)
        if self.grid_size < elliptic.MIN_GRID_SIZE:
            self._fail("problem.grid_size", "must be at least %d" % elliptic.MIN_GRID_SIZE)

        self.coefficient_kind = self._raw("problem", "coefficient.kind", "constant")
        if self.coefficient_kind not in ("constant", "sine"):
            self._fail("problem.coefficient.kind", "must be constant or sine")
        self.coefficient_value = self._real("problem", "coefficient.value", 1.0)
        self.coefficient_amplitude = self._real("problem", "coefficient.amplitude", 0.0)
        if self.domain == "rectangle" and (self.coefficient_kind != "constant" or self.coefficient_value != 1.0):
            self._fail("problem.coefficient", "the rectangle carries the Laplacian only")

    def _read_resonance(self):
        self.k = self._int("resonance", "k")
        self.lambda_target = self._real("resonance", "lambda_target")
        if (self.k is None) == (self.lambda_target is None):
            self._fail("resonance", "needs exactly one of k and lambda_target")
        if self.k is not None and self.k < 1:
            self._fail("resonance.k", "must be at least 1")
        self.alpha = self._real("resonance", "alpha", 0.8)
        if not 0.75 < self.alpha < 1.0:
            self._fail("resonance.alpha", "must lie in (3/4, 1)")

    def _read_nonlinearity(self):
        if not self._parser.has_section("nonlinearity"):
            self.family = None
            self.params = {}
            return
        options = dict(self._parser.items("nonlinearity"))
        self.family = options.pop("family", None)
        if self.family is None:
            self._fail("nonlinearity.family", "is required")
        if not nonlinearity.has_family(self.family):
            self._fail("nonlinearity.family", "names no known family (%s)" % ", ".join(nonlinearity.all_families()))
        self.params = dict((key, _param_value(value, "nonlinearity." + key)) for key, value in options.items())

    def _read_time(self):
        self.period = self._real("time", "period", 1.0)
        if self.period <= 0:
            self._fail("time.period", "must be positive")
        self.dt = self._real("time", "dt", self.period / evolve.STEPS_PER_PERIOD)
        if self.dt <= 0:
            self._fail("time.dt", "must be positive")
        self.scheme = self._raw("time", "scheme", "etd2rk")
        if self.scheme not in evolve.SCHEMES:
            self._fail("time.scheme", "must be one of %s" % ", ".join(evolve.SCHEMES))

    def _read_experiment(self):
        self.experiment = self._raw("experiment", "name")
        if not self.experiment:
            self._fail("experiment.name", "is required")

    def _read_solver(self):
        modes = self.grid_size ** len(self.lengths)
        self.mode_cut = self._int("solver", "mode_cut", min(DEFAULT_MODE_CUT, modes))
        if not 0 < self.mode_cut <= modes:
            self._fail("solver.mode_cut", "must lie in 1..%d" % modes)
        self.mode_cut_check = self._int("solver", "mode_cut_check", min(self.mode_cut + 32, modes))
        if not 0 < self.mode_cut_check <= modes:
            self._fail("solver.mode_cut_check", "must lie in 1..%d" % modes)
        self.seeds = self._list("solver", "seeds", (0.0, 1.0, -1.0))
        self.random_seeds = self._int("solver", "random_seeds", 0)
        if self.random_seeds < 0:
            self._fail("solver.random_seeds", "must not be negative")
        self.eps_list = self._list("solver", "eps_list", (0.2, 0.1, 0.05))
        if not self.eps_list or any(not 0 < eps <= 1 for eps in self.eps_list):
            self._fail("solver.eps_list", "must hold values in (0, 1]")
        for key, default in (("u_radius", 4.0), ("v_radius", 1.0), ("ball_radius", 20.0), ("b_radius", 1.0)):
            value = self._real("solver", key, default)
            if value <= 0:
                self._fail("solver." + key, "must be positive")
            setattr(self, key, value)
        self.r_grid = self._list("solver", "r_grid", (5.0, 10.0, 20.0, 40.0))
        if not self.r_grid or min(self.r_grid) <= 0:
            self._fail("solver.r_grid", "must hold positive radii")

    def _read_output(self):
        self.directory = self._raw("output", "directory", os.path.join("runs", self.experiment))
        self.formats = [part.strip() for part in self._raw("output", "formats", "csv").split(",") if part.strip()]
        if any(fmt not in ("csv",) for fmt in self.formats):
            self._fail("output.formats", "supports csv only")

    # Overrides and echo.

    def override(self, output_dir=None, seed=None):
        """Applies the command-line overrides."""
        if output_dir is not None:
            self.directory = output_dir
        if seed is not None:
            self.seed = int(seed)

    def echo(self):
        """The config as read, section by section, with the effective output directory and seed."""
        sections = dict((name, dict(self._parser.items(name))) for name in self._parser.sections())
        sections.setdefault("output", {})["directory"] = self.directory
        sections.setdefault("run", {})["seed"] = str(self.seed)
        return sections

    # Builders.

    def build_problem(self):
        if self.domain == "rectangle":
            return elliptic.EllipticProblem(self.lengths, self.grid_size)
        value, amplitude = self.coefficient_value, self.coefficient_amplitude
        coefficient = None
        if self.coefficient_kind == "sine":
            coefficient = lambda x: value + amplitude * np.sin(x)
        elif value != 1.0:
            coefficient = lambda x: np.full_like(x, value)
        return elliptic.EllipticProblem(self.lengths[0], self.grid_size, coefficient)

    def build_decomposition(self, problem=None):
        problem = self.build_problem() if problem is None else problem
        matrix = elliptic.assemble(problem)
        rtol = elliptic.SNAP_RTOL if self.lambda_target is None else problem.snap_rtol(self.lambda_target)
        return elliptic.decompose(matrix, self.lambda_target, self.alpha, problem, k=self.k, rtol=rtol)

    def build_nonlinearity(self, dec):
        """Builds the configured family; kernel_constant takes its profile from the given decomposition."""
        if self.family is None:
            self._fail("nonlinearity.family", "is required by this experiment")
        if self.family == "kernel_constant":
            params = dict(self.params)
            mode = int(params.pop("mode", 0))
            amplitude = params.pop("amplitude", 1.0)
            if params:
                self._fail("nonlinearity", "kernel_constant takes amplitude and mode only")
            if not 0 <= mode < dec.kernel_dim:
                self._fail("nonlinearity.mode", "must lie in 0..%d" % (dec.kernel_dim - 1))
            return families.kernel_constant(dec, amplitude, mode, self.period)
        return nonlinearity.builtin(self.family, period=self.period, **self.params)

    def build_setup(self, dec, nl, epsilon=1.0):
        return evolve.EvolutionSetup(dec, nl, epsilon, self.dt, self.scheme)

    def build_seeds(self, dec):
        """Initial guesses: each amplitude in seeds along the first kernel eigenvector, then random_seeds random low-mode states drawn from the run seed."""
        kernel = dec.kernel_basis[:, 0]
        seeds = [elliptic.GridFunction.from_values(dec, amplitude * kernel) for amplitude in self.seeds]
        rng = np.random.default_rng(self.seed)
        low = min(8, dec.size)
        for _ in range(self.random_seeds):
            spectral = np.zeros(dec.size)
            spectral[:low] = rng.normal(0.0, 2.0, low) / np.arange(1, low + 1)
            seeds.append(elliptic.GridFunction.from_spectral(dec, spectral))
        return seeds
