"""Sampled checks of the geometric conditions G1/G2 and of the Landesman-Lazer and strong-resonance criteria.

A sampled universal quantifier cannot certify a strict sign, so every check returns a ConditionReport with holds in {yes, no, inconclusive} rather than a boolean.
"""

import logging
import math

import numpy as np

from resonancewrangler import errors, nonlinearity
from resonancewrangler.nonlinearity import LANDESMAN_LAZER, STRONG_RESONANCE

log = logging.getLogger(__name__)

YES = "yes"
NO = "no"
INCONCLUSIVE = "inconclusive"
MARGIN_FLOOR = 1e-10
AXIS_EXTREMES = 4

_SIGNS = {"G1": 1.0, "G2": -1.0, "LL1": 1.0, "LL2": -1.0, "SR1": 1.0, "SR2": -1.0}


class ConditionReport(object):
    """The verdict on one condition. margin is sign-adjusted: positive means the required sign held with that much room."""

    def __init__(self, condition, holds, margin, witness=None, R_used=None, details=None):
        self.condition = condition
        self.holds = holds
        self.margin = margin
        self.witness = witness
        self.R_used = R_used
        self.details = details or {}

    def summary(self):
        return {
            "condition": self.condition,
            "holds": self.holds,
            "margin": self.margin,
            "R_used": self.R_used,
            "witness": self.witness,
        }

    def __repr__(self):
        return "ConditionReport(%s: %s, margin=%.6g)" % (self.condition, self.holds, self.margin)


def _sign(which, allowed):
    if which not in allowed:
        raise errors.ConfigurationError("unknown condition %r, expected one of %s" % (which, ", ".join(allowed)))
    return _SIGNS[which]


def kernel_sphere(dec, radius, samples=128):
    """Kernel coordinates on the H-sphere of the given radius: both signs in one dimension, samples angles in two, random unit directions otherwise."""
    dim = dec.kernel_dim
    if dim == 1:
        return np.array([[radius], [-radius]])
    if dim == 2:
        theta = 2.0 * math.pi * np.arange(samples) / samples
        return radius * np.column_stack([np.cos(theta), np.sin(theta)])
    directions = np.random.default_rng(dim).standard_normal((samples, dim))
    return radius * directions / np.linalg.norm(directions, axis=1, keepdims=True)


def q_ball_samples(dec, radius, count=64, rng=None):
    """Spectral coefficients of points of the Q-space ball ||y||_alpha <= radius: the origin, the extremes along the lowest Q modes and random points."""
    rng = np.random.default_rng(0) if rng is None else rng
    q_modes = np.flatnonzero(dec.mask("Q"))
    weights = dec.alpha_weights
    rows = [np.zeros(dec.size)]
    for mode in q_modes[:AXIS_EXTREMES]:
        for sign in (1.0, -1.0):
            row = np.zeros(dec.size)
            row[mode] = sign * radius / weights[mode]
            rows.append(row)
    if len(q_modes):
        random = np.zeros((count, dec.size))
        random[:, q_modes] = rng.standard_normal((count, len(q_modes))) / weights[q_modes]
        norms = np.linalg.norm(random * weights, axis=1, keepdims=True)
        random *= radius * rng.uniform(0.0, 1.0, (count, 1)) ** (1.0 / len(q_modes)) / norms
        rows.extend(random)
    return np.array(rows)


def check_geometric(dec, nl, which, b_radius, r_grid, t_samples=32, kernel_samples=128, y_samples=64, rng=None):
    """Samples <F(t, x + y), x>_H / ||x||_H for y in the Q-space ball, x on kernel spheres of every radius in r_grid and t across one period.

    G1 asks for a positive pairing, G2 for a negative one. holds is yes when the sign is strict at every radius from R_used to the largest, no when no radius is clean (the witness is the worst sample at the largest radius), inconclusive otherwise.
    """
    sign = _sign(which, ("G1", "G2"))
    if dec.kernel_dim < 1:
        raise errors.ConfigurationError("the geometric conditions need a nontrivial kernel")
    r_grid = sorted(float(r) for r in r_grid)
    if not r_grid or r_grid[0] <= 0:
        raise errors.ConfigurationError("r_grid must hold positive radii")

    problem = dec.problem
    ys = dec.to_values(q_ball_samples(dec, b_radius, y_samples, rng))
    times = np.linspace(0.0, nl.period, t_samples, endpoint=False)
    margins = []
    worst = None
    for radius in r_grid:
        zs = kernel_sphere(dec, radius, kernel_samples)
        xs = zs @ dec.kernel_basis.T
        states = (xs[:, None, :] + ys[None, :, :]).reshape(-1, problem.size)
        lowest = math.inf
        for t in times:
            forced = nonlinearity.evaluate(nl, problem, t, states).reshape(len(xs), len(ys), problem.size)
            pairing = sign * problem.cell * np.einsum("xyn,xn->xy", forced, xs) / radius
            i, j = np.unravel_index(np.argmin(pairing), pairing.shape)
            if pairing[i, j] < lowest:
                lowest = float(pairing[i, j])
                candidate = {"t": float(t), "x": zs[i].tolist(),
                             "y_norm": float(np.linalg.norm(dec.to_spectral(ys[j]) * dec.alpha_weights)),
                             "value": sign * lowest}
        margins.append(lowest)
        worst = candidate
        log.debug("%s at R = %g: margin %.6g", which, radius, lowest)

    clean = [margin > MARGIN_FLOOR for margin in margins]
    details = {"r_grid": r_grid, "margins": margins}
    if clean[-1]:
        first = len(clean) - 1
        while first > 0 and clean[first - 1]:
            first -= 1
        return ConditionReport(which, YES, margins[-1], R_used=r_grid[first], details=details)
    if not any(clean):
        return ConditionReport(which, NO, margins[-1], witness=worst, details=details)
    return ConditionReport(which, INCONCLUSIVE, margins[-1], witness=worst, details=details)


def _require(nl, kind, keys):
    asymptotics = nl.asymptotics
    if not asymptotics or asymptotics.get("kind") != kind or any(key not in asymptotics for key in keys):
        raise errors.ConfigurationError("%s declares no %s data (%s)" % (nl.name, kind.replace("_", "-"), ", ".join(keys)))


def check_landesman_lazer(dec, nl, which, kernel_samples=128):
    """Evaluates int_{y > 0} g+ y + int_{y < 0} g- y over kernel functions y on the unit H-sphere. LL1 asks for a positive value everywhere, LL2 for a negative one."""
    sign = _sign(which, ("LL1", "LL2"))
    _require(nl, LANDESMAN_LAZER, ("g_plus", "g_minus"))
    problem = dec.problem
    g_plus = nl.asymptotic("g_plus", problem.nodes)
    g_minus = nl.asymptotic("g_minus", problem.nodes)

    zs = kernel_sphere(dec, 1.0, kernel_samples)
    ys = zs @ dec.kernel_basis.T
    integrals = problem.cell * np.sum(np.where(ys > 0, g_plus, g_minus) * ys, axis=1)
    adjusted = sign * integrals
    worst = int(np.argmin(adjusted))
    margin = float(adjusted[worst])
    if margin > MARGIN_FLOOR:
        return ConditionReport(which, YES, margin)
    return ConditionReport(which, NO, margin, witness={"z": zs[worst].tolist(), "value": float(integrals[worst])})


def check_strong_resonance(dec, nl, which, count=10000, rng=None, s_range=50.0):
    """Samples g(t, x, s, grad) s >= q(x) (SR1) or <= q(x) (SR2) on random points and integrates g_infinity over the domain, which must be positive (SR1) or negative (SR2)."""
    sign = _sign(which, ("SR1", "SR2"))
    _require(nl, STRONG_RESONANCE, ("g_infinity", "q"))
    rng = np.random.default_rng(0) if rng is None else rng
    problem = dec.problem

    x = problem.nodes[rng.integers(0, problem.size, count)]
    t = rng.uniform(0.0, nl.period, count)
    s = rng.uniform(-s_range, s_range, count)
    grad = rng.uniform(-s_range, s_range, (count,) if problem.dim == 1 else (count, problem.dim))
    products = np.asarray(nl(t, x, s, grad), dtype=float) * s
    pointwise = sign * (products - nl.asymptotic("q", x))
    worst = int(np.argmin(pointwise))

    integral = problem.integrate(lambda points: nl.asymptotic("g_infinity", points))
    details = {"pointwise_margin": float(pointwise[worst]), "g_infinity_integral": integral}
    margin = sign * integral

    if pointwise[worst] < -MARGIN_FLOOR:
        witness = {"t": float(t[worst]), "x": np.atleast_1d(x[worst]).tolist(), "s": float(s[worst]),
                   "value": float(products[worst])}
        return ConditionReport(which, NO, margin, witness=witness, details=details)
    if sign * integral <= MARGIN_FLOOR:
        return ConditionReport(which, NO, margin, witness={"g_infinity_integral": integral}, details=details)
    return ConditionReport(which, YES, margin, details=details)
