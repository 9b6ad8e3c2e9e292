"""Niemytzki operators F(t, y)(x) = g(t, x, y(x), grad y(x)) and the registry of built-in families.

A Nonlinearity wraps a vectorized pointwise map g together with the metadata the resonance machinery needs: the period T, the declared sup bound m, the declared Lipschitz constant L and, when known, the asymptotic data of the Landesman-Lazer (g+, g-) or strong-resonance (g_inf, q) conditions.

Families are classes decorated with @register_family('name'). Their parameters are declared as methods decorated with @required_param('param') or @optional_param('param', default), which validate proposed values. Every family must declare an instance method called _build, which takes the validated parameter dict (defaults filled in) and the period and returns a Nonlinearity.

    arctan = get_family('arctan')
    if arctan.validate(params):
        nl = arctan().build(params, period)
"""

import logging
import math

import numpy as np

from resonancewrangler import errors

log = logging.getLogger(__name__)

_registry = {}

LANDESMAN_LAZER = "landesman_lazer"
STRONG_RESONANCE = "strong_resonance"


class Nonlinearity(object):
    """A time-periodic pointwise map g(t, x, s, grad) with its declared constants.

    The pointwise callable is vectorized: x is the array of node coordinates, s the array of values and grad the array of gradients (shape (N,) on an interval, (N, 2) on a rectangle). It returns one value per node.
    """

    def __init__(self, name, pointwise, period, bound_m, lipschitz_L, asymptotics=None, uses_gradient=False):
        """Creates a Nonlinearity.

        Args:
            asymptotics: None, {"kind": LANDESMAN_LAZER, "g_plus": callable, "g_minus": callable} or {"kind": STRONG_RESONANCE, "g_infinity": callable, "q": callable}. Callables take node coordinates and return one value per node.
        """
        if period <= 0:
            raise errors.ConfigurationError("period must be positive")
        self._name = name
        self._pointwise = pointwise
        self._period = float(period)
        self._bound_m = float(bound_m)
        self._lipschitz_L = float(lipschitz_L)
        self._asymptotics = dict(asymptotics) if asymptotics else None
        self._uses_gradient = bool(uses_gradient)

    @property
    def name(self):
        return self._name

    @property
    def period(self):
        return self._period

    @property
    def bound_m(self):
        return self._bound_m

    @property
    def lipschitz_L(self):
        return self._lipschitz_L

    @property
    def asymptotics(self):
        return self._asymptotics

    @property
    def uses_gradient(self):
        return self._uses_gradient

    def __call__(self, t, x, s, grad):
        return self._pointwise(t, x, s, grad)

    def asymptotic(self, key, points):
        """Evaluates one declared asymptotic function at the given points. Raises ConfigurationError if it is not declared."""
        if not self._asymptotics or key not in self._asymptotics:
            raise errors.ConfigurationError("%s declares no asymptotic datum %r" % (self._name, key))
        count = len(points)
        return np.broadcast_to(np.asarray(self._asymptotics[key](points), dtype=float), (count,))

    def negated(self):
        """Returns -g with the matching metadata: limits change sign, and the strong-resonance bound q becomes an upper bound -q."""
        pointwise = self._pointwise
        asymptotics = None
        if self._asymptotics:
            asymptotics = {"kind": self._asymptotics["kind"]}
            for key, func in self._asymptotics.items():
                if key != "kind":
                    asymptotics[key] = _negate(func)
        return Nonlinearity("neg_" + self._name, lambda t, x, s, grad: -pointwise(t, x, s, grad),
                            self._period, self._bound_m, self._lipschitz_L, asymptotics, self._uses_gradient)


def _negate(func):
    return lambda points: -np.asarray(func(points), dtype=float)


def apply(nl, dec, t, u):
    """Evaluates the Niemytzki operator on a grid function and returns a grid function in the same decomposition."""
    from resonancewrangler.elliptic import GridFunction

    u = dec.coerce(u)
    return GridFunction.from_values(dec, evaluate(nl, dec.problem, t, u.values))


def evaluate(nl, problem, t, values):
    """Array-level Niemytzki evaluation on grid values; a 2D array holds one state per row. Raises NonlinearityDomainError on non-finite output."""
    values = np.asarray(values, dtype=float)
    grad_shape = values.shape if problem.dim == 1 else values.shape + (problem.dim,)
    if nl.uses_gradient:
        grad = np.stack([problem.gradient(row) for row in values.reshape(-1, problem.size)]).reshape(grad_shape)
    else:
        grad = np.zeros(grad_shape)
    out = np.broadcast_to(np.asarray(nl(t, problem.nodes, values, grad), dtype=float), values.shape)
    if not np.all(np.isfinite(out)):
        raise errors.NonlinearityDomainError("%s returned a non-finite value at t = %.6g" % (nl.name, t))
    return out


def gradient_operator_norm(problem):
    """Norm of the difference-gradient operator on grid values, summed over the gradient components."""
    identity = np.eye(problem.size)
    columns = [problem.gradient(identity[:, j]) for j in range(problem.size)]
    stacked = np.stack(columns, axis=-1)
    if problem.dim == 1:
        return float(np.linalg.norm(stacked, 2))
    return float(sum(np.linalg.norm(stacked[:, i, :], 2) for i in range(problem.dim)))


def measured_lipschitz(nl, dec, count=100, rng=None, t=0.0):
    """Largest ratio ||F(t, u) - F(t, v)||_H / ||u - v||_H over random pairs."""
    rng = np.random.default_rng(0) if rng is None else rng
    problem = dec.problem
    worst = 0.0
    for _ in range(count):
        u = rng.standard_normal(problem.size)
        v = u + 0.1 * rng.standard_normal(problem.size)
        num = evaluate(nl, problem, t, u) - evaluate(nl, problem, t, v)
        worst = max(worst, math.sqrt(problem.inner(num, num) / problem.inner(u - v, u - v)))
    return worst


def sample_invariants(nl, problem, count=10000, rng=None, s_range=50.0):
    """Samples (t, x, s, grad) points and measures the worst violation of periodicity, of the declared bound and of the declared Lipschitz constant.

    Returns a dict: periodicity holds the largest |g(t + T) - g(t)|; bound and lipschitz hold the largest excess over the declared constant (zero or negative means the declaration held).
    """
    rng = np.random.default_rng(0) if rng is None else rng
    nodes = problem.nodes
    pick = rng.integers(0, problem.size, count)
    x = nodes[pick]
    t = rng.uniform(0.0, nl.period, count)
    s = rng.uniform(-s_range, s_range, count)
    grad_shape = (count,) if problem.dim == 1 else (count, 2)
    grad = rng.uniform(-s_range, s_range, grad_shape)

    value = np.asarray(nl(t, x, s, grad), dtype=float)
    shifted = np.asarray(nl(t + nl.period, x, s, grad), dtype=float)

    s2 = s + rng.normal(0.0, 1.0, count)
    grad2 = grad + rng.normal(0.0, 1.0, grad_shape)
    other = np.asarray(nl(t, x, s2, grad2), dtype=float)
    distance = np.abs(s - s2) + np.abs(grad - grad2).reshape(count, -1).sum(axis=1)

    return {
        "periodicity": float(np.max(np.abs(value - shifted))),
        "bound": float(np.max(np.abs(value))) - nl.bound_m,
        "lipschitz": float(np.max(np.abs(value - other) - nl.lipschitz_L * distance)),
    }


class UnbuildableFamilyError(Exception):
    """Indicates that a class decorated with @register_family lacks a _build method."""
    pass


class DuplicateParamError(Exception):
    """Indicates that multiple params of a family were declared with the same name."""
    pass


class InvalidParamsError(errors.ConfigurationError):
    """Indicates that the params passed to the build method of a family failed validation."""
    pass


class UnknownFamilyError(errors.ConfigurationError):
    """Indicates that the given family name does not have a registered family."""
    pass


def register_family(name):
    """Class decorator: registers a class as the builder of a named family.

    Classes decorated with this get the following attributes, which shouldn't be modified except through the mechanisms in this module:
        family: The name passed into this decorator.
        required: A map from required param names to their validators.
        optional: A map from optional param names to (validator, default) pairs.
        validate: Class method: takes a params dict and checks that every required param is present, that no unknown param is present and that all values are valid.
        build: Takes a params dict and a period, validates the params, fills in defaults, then calls _build.
    """
    def decorator(cls):
        if not hasattr(cls, "_build"):
            raise UnbuildableFamilyError

        cls.required = {}
        cls.optional = {}

        for method in cls.__dict__.values():
            if hasattr(method, "_required_param"):
                if method._required_param in cls.required or method._required_param in cls.optional:
                    raise DuplicateParamError
                cls.required[method._required_param] = method

            elif hasattr(method, "_optional_param"):
                if method._optional_param in cls.required or method._optional_param in cls.optional:
                    raise DuplicateParamError
                cls.optional[method._optional_param] = (method, method._default)

        @classmethod
        def validate(cls, params):
            num_required = 0

            for param, value in params.items():
                if param in cls.required:
                    if not cls.required[param](value):
                        return False
                    num_required += 1
                elif param in cls.optional:
                    if not cls.optional[param][0](value):
                        return False
                else:
                    # Spurious param!
                    return False

            return num_required == len(cls.required)
        cls.validate = validate

        def build(self, params, period):
            if not self.validate(params):
                raise InvalidParamsError("invalid params for family %r: %s" % (name, sorted(params)))
            filled = dict((param, default) for param, (_, default) in self.optional.items())
            filled.update(params)
            return self._build(filled, period)
        cls.build = build

        # Register at the end, so we don't register broken stuff.
        _registry[name] = cls
        cls.family = name

        return cls
    return decorator


def required_param(name):
    """Method decorator: marks a method as the validator for a required param. The validator takes the proposed value and returns True iff it is valid."""
    def decorator(func):
        func._required_param = name
        return func
    return decorator


def optional_param(name, default):
    """Method decorator: marks a method as the validator for an optional param with the given default."""
    def decorator(func):
        func._optional_param = name
        func._default = default
        return func
    return decorator


def has_family(name):
    return name in _registry


def all_families():
    """Returns the registered family names, sorted."""
    return sorted(_registry)


def get_family(name):
    """Gets the family registered under a name, or raises UnknownFamilyError."""
    try:
        return _registry[name]
    except KeyError:
        raise UnknownFamilyError("unknown nonlinearity family %r; known: %s" % (name, ", ".join(all_families())))


def builtin(name, period=1.0, **params):
    """Builds a registered family by name."""
    return get_family(name)().build(params, period)


from resonancewrangler.nonlinearity import families  # noqa: E402,F401  (registers the built-ins)
