"""Degrees on the kernel and of the translation operator.

The averaged kernel map g(z) = int_0^T P F(t, sum z_i e_i) dt is evaluated in kernel coordinates. Its Brouwer degree is computed from boundary signs (one kernel direction) or a winding number (two directions). The Leray-Schauder degree of I - Phi_T is realized on the truncated Newton space as a sum of Jacobian signs over regular fixed points.
"""

import logging
import math

import numpy as np
from scipy.integrate import solve_ivp, trapezoid
from scipy.optimize import bisect, fsolve

from resonancewrangler import errors, nonlinearity, poincare
from resonancewrangler.elliptic import GridFunction, fractional_norm, project

log = logging.getLogger(__name__)

BOUNDARY_SAMPLES = 720
DEGREE_FLOOR = 1e-10
JUMP_GUARD = math.pi / 2
ROUNDING_GUARD = 0.1
DEDUP_TOL = 1e-5
SHELL = (0.95, 1.05)


class KernelMap(object):
    """g(z) in the coordinates of the kernel eigenvectors, by composite trapezoidal quadrature in t."""

    def __init__(self, dec, nl, quadrature_nodes=64):
        if quadrature_nodes < 1:
            raise errors.ConfigurationError("quadrature_nodes must be positive")
        self._dec = dec
        self._nl = nl
        self._nodes = int(quadrature_nodes)

    @property
    def dec(self):
        return self._dec

    @property
    def nonlinearity(self):
        return self._nl

    @property
    def quadrature_nodes(self):
        return self._nodes

    @property
    def dim(self):
        return self._dec.kernel_dim

    def embed(self, z):
        """The kernel element with coordinates z."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        return GridFunction.from_values(self._dec, self._dec.kernel_basis @ z)

    def coordinates(self, u):
        """Kernel coordinates of P u."""
        return np.asarray(self._dec.coerce(u).spectral[self._dec.kernel_modes], dtype=float)

    def instantaneous(self, t, z):
        """Kernel coordinates of P F(t, x) for x with kernel coordinates z; z may hold one point per row."""
        z = np.asarray(z, dtype=float)
        values = np.atleast_2d(z) @ self._dec.kernel_basis.T
        forced = nonlinearity.evaluate(self._nl, self._dec.problem, t, values)
        out = self._dec.problem.cell * (forced @ self._dec.kernel_basis)
        return out.reshape(z.shape)

    def evaluate(self, z):
        z = np.asarray(z, dtype=float)
        times = np.linspace(0.0, self._nl.period, self._nodes + 1)
        samples = np.stack([self.instantaneous(t, z) for t in times])
        return trapezoid(samples, times, axis=0)


class VectorField(object):
    """A plain vector field on R^dim, for test maps and controls; func takes one point per row."""

    def __init__(self, func, dim):
        self._func = func
        self._dim = int(dim)

    @property
    def dim(self):
        return self._dim

    def evaluate(self, z):
        z = np.asarray(z, dtype=float)
        return np.asarray(self._func(np.atleast_2d(z)), dtype=float).reshape(z.shape)


def negated(field):
    return VectorField(lambda z: -field.evaluate(z), field.dim)


def averaged_map(km, z):
    """g(z) for a kernel coordinate vector z."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if not np.all(np.isfinite(z)):
        raise errors.ConfigurationError("kernel coordinates must be finite")
    return km.evaluate(z)


class DegreeResult(object):
    """An integer degree with the record that certifies it. value is None when the sum could not be certified."""

    def __init__(self, value, method, min_boundary=None, samples=0, status="certified", count=None, ambiguous=False):
        self.value = value
        self.method = method
        self.min_boundary = min_boundary
        self.samples = samples
        self.status = status
        self.count = count
        self.ambiguous = ambiguous

    def __repr__(self):
        return "DegreeResult(value=%r, method=%r, status=%r)" % (self.value, self.method, self.status)


def brouwer_degree(field, radius, samples=BOUNDARY_SAMPLES, floor=DEGREE_FLOOR):
    """Brouwer degree of a field on the ball of the given radius in dimension one or two.

    Raises DegreeUndefinedError when the field nearly vanishes on a boundary sample and ResolutionError when consecutive samples turn by more than pi/2.
    """
    if not radius > 0:
        raise errors.ConfigurationError("radius must be positive")
    if field.dim == 1:
        values = field.evaluate(np.array([[-radius], [radius]]))[:, 0]
        smallest = float(np.min(np.abs(values)))
        if smallest < floor:
            raise errors.DegreeUndefinedError("field vanishes on the boundary of B(0, %g): |g| = %.3g" % (radius, smallest))
        value = int((np.sign(values[1]) - np.sign(values[0])) / 2)
        return DegreeResult(value, "sign-change-1d", smallest, 2)

    if field.dim == 2:
        theta = 2.0 * math.pi * np.arange(samples) / samples
        points = radius * np.column_stack([np.cos(theta), np.sin(theta)])
        values = field.evaluate(points)
        magnitudes = np.linalg.norm(values, axis=1)
        smallest = float(np.min(magnitudes))
        if smallest < floor:
            raise errors.DegreeUndefinedError("field vanishes on the boundary of B(0, %g): |g| = %.3g" % (radius, smallest))
        angles = np.arctan2(values[:, 1], values[:, 0])
        jumps = np.diff(np.append(angles, angles[0]))
        jumps = (jumps + math.pi) % (2.0 * math.pi) - math.pi
        if np.max(np.abs(jumps)) > JUMP_GUARD:
            raise errors.ResolutionError("winding is under-resolved with %d samples (jump %.3g); use more samples"
                                         % (samples, np.max(np.abs(jumps))))
        turns = float(np.sum(jumps)) / (2.0 * math.pi)
        value = int(round(turns))
        if abs(turns - value) >= ROUNDING_GUARD:
            raise errors.ResolutionError("winding number %.4f is not near an integer" % turns)
        return DegreeResult(value, "winding-2d", smallest, samples)

    raise errors.UnsupportedDimensionError("Brouwer degree needs a kernel of dimension 1 or 2, got %d" % field.dim)


def sign_relation(field, radius, samples=BOUNDARY_SAMPLES):
    """Checks deg(-g) = (-1)^dim deg(g) on the ball of the given radius."""
    degree = brouwer_degree(field, radius, samples).value
    flipped = brouwer_degree(negated(field), radius, samples).value
    expected = (-1) ** field.dim * degree
    return {"degree": degree, "negated_degree": flipped, "expected": expected, "holds": flipped == expected}


def kernel_root(field, radius):
    """A zero of the field inside B(0, radius): bisection on [-radius, radius] in one dimension, fsolve from the origin in two. Returns None when none is found."""
    if field.dim == 1:
        def scalar(s):
            return float(field.evaluate(np.array([s]))[0])
        low, high = scalar(-radius), scalar(radius)
        if low == 0.0:
            return np.array([-radius])
        if high == 0.0:
            return np.array([radius])
        if np.sign(low) == np.sign(high):
            return None
        return np.array([bisect(scalar, -radius, radius, xtol=1e-12, rtol=1e-14, maxiter=200)])

    root, _, found, message = fsolve(lambda z: field.evaluate(z), np.zeros(field.dim), full_output=True, xtol=1e-12)
    if found != 1 or np.linalg.norm(root) > radius:
        log.debug("no kernel root in B(0, %g): %s", radius, message)
        return None
    return root


def linear_degree_count(dec, period, mode_cut=None):
    """Product of sign(1 - e^{(lambda - mu_j) T}) over the non-kernel modes below mode_cut."""
    if not period > 0:
        raise errors.ConfigurationError("period must be positive")
    cut = dec.size if mode_cut is None else min(int(mode_cut), dec.size)
    outside = np.ones(dec.size, dtype=bool)
    outside[dec.kernel_modes] = False
    factors = 1.0 - np.exp(dec.rates[:cut] * period)
    return int(np.prod(np.sign(factors[outside[:cut]])))


class Ball(object):
    """The ball ||x||_alpha <= radius."""

    def __init__(self, radius):
        self.radius = float(radius)

    def contains(self, dec, x):
        return fractional_norm(dec, x, "alpha") <= self.radius

    def near_boundary(self, dec, x):
        return _in_shell(fractional_norm(dec, x, "alpha"), self.radius)


class Cylinder(object):
    """U + V: ||P x||_H <= u_radius and ||Q x||_alpha <= v_radius."""

    def __init__(self, u_radius, v_radius):
        self.u_radius = float(u_radius)
        self.v_radius = float(v_radius)

    def _parts(self, dec, x):
        return (fractional_norm(dec, project(dec, x, "P"), "H"),
                fractional_norm(dec, project(dec, x, "Q"), "alpha"))

    def contains(self, dec, x):
        p, q = self._parts(dec, x)
        return p <= self.u_radius and q <= self.v_radius

    def near_boundary(self, dec, x):
        p, q = self._parts(dec, x)
        return _in_shell(p, self.u_radius) or _in_shell(q, self.v_radius)


def _in_shell(norm, radius):
    return SHELL[0] * radius <= norm <= SHELL[1] * radius


def ls_degree_regular(setup, ball_radius, seeds, mode_cut=None, region=None):
    """Sum of sign det(I - DPhi_T) over the distinct fixed points found from the seeds inside the region (default: the ball of ball_radius).

    A degenerate fixed point makes the sum uncertifiable (status cannot_certify, value None). Fixed points on the shell [0.95 R, 1.05 R] set ambiguous.
    """
    dec = setup.dec
    region = Ball(ball_radius) if region is None else region
    found = []
    ambiguous = False
    for seed in seeds:
        orbit = poincare.find_fixed_point(setup, seed, mode_cut)
        if orbit.status == poincare.DEGENERATE:
            log.warning("eps = %g: degenerate fixed point, degree sum cannot be certified", setup.epsilon)
            return DegreeResult(None, "jacobian-sum", samples=len(seeds), status="cannot_certify",
                                count=len(found))
        if not orbit.certified:
            continue
        if region.near_boundary(dec, orbit.fixed_point):
            log.warning("eps = %g: fixed point near the boundary of the region, radius is ambiguous", setup.epsilon)
            ambiguous = True
        if not region.contains(dec, orbit.fixed_point):
            continue
        if any(fractional_norm(dec, orbit.fixed_point - other.fixed_point, "alpha") < DEDUP_TOL for other in found):
            continue
        found.append(orbit)

    value = sum(orbit.jacobian_sign for orbit in found)
    log.debug("eps = %g: %d fixed points, degree sum %d", setup.epsilon, len(found), value)
    return DegreeResult(value, "jacobian-sum", samples=len(seeds), count=len(found), ambiguous=ambiguous)


def translation_map(km, mu, rtol=1e-10, atol=1e-12):
    """The field z - Theta(z), Theta the time-T translation along z' = mu P F(t, z) on the kernel coordinates."""
    period = km.nonlinearity.period

    def displacement(points):
        out = np.empty_like(points)
        for i, z in enumerate(points):
            solution = solve_ivp(lambda t, y: mu * km.instantaneous(t, y), (0.0, period), z,
                                 method="RK45", rtol=rtol, atol=atol)
            if not solution.success:
                raise errors.DivergenceError(float(solution.t[-1]), solution.message)
            out[i] = z - solution.y[:, -1]
        return out

    return VectorField(displacement, km.dim)


def translation_degree(km, radius, mu=0.1, samples=BOUNDARY_SAMPLES):
    """Finite-dimensional control: deg(I - Theta, U) next to deg(-g, U). Both should agree for small mu."""
    control = brouwer_degree(translation_map(km, mu), radius, samples)
    averaged = brouwer_degree(negated(km), radius, samples)
    return {"translation": control.value, "averaged": averaged.value, "holds": control.value == averaged.value}


def averaging_experiment(setup_template, eps_list, u_radius, v_radius, seeds=(), mode_cut=None, quadrature_nodes=64):
    """Resonant averaging: for each eps, a fixed point in U + V, the approach of its kernel coordinate to a root of g, and the degree sum against (-1)^{d_k} deg_B(g, U).

    Returns a dict with one row per eps (descending), the degree of g and the overall verdict, which is the verdict at the smallest eps.
    """
    dec = setup_template.dec
    km = KernelMap(dec, setup_template.nonlinearity, quadrature_nodes)
    region = Cylinder(u_radius, v_radius)

    try:
        g_degree = brouwer_degree(km, u_radius).value
    except errors.DegreeUndefinedError as e:
        log.warning("degree of the averaged map is undefined: %s", e)
        g_degree = None
    root = kernel_root(km, u_radius) if g_degree is not None else None
    expected = None if g_degree is None else (-1) ** dec.d_k * g_degree

    start = km.embed(root) if root is not None else GridFunction.zeros(dec)
    orbits = poincare.sweep_epsilon(setup_template, eps_list, start, mode_cut)

    rows = []
    for orbit in orbits:
        row = {
            "eps": orbit.epsilon,
            "fixed_point_found": orbit.certified and region.contains(dec, orbit.fixed_point),
            "q_norm": orbit.q_norm if orbit.certified else float("nan"),
            "kernel_coord": float("nan"),
            "g_root_distance": float("nan"),
            "degree_value": float("nan"),
            "expected_degree": float("nan") if expected is None else expected,
            "pass": False,
        }
        if orbit.certified:
            coords = km.coordinates(orbit.fixed_point)
            row["kernel_coord"] = float(coords[0]) if len(coords) == 1 else float(np.linalg.norm(coords))
            if root is not None:
                scale = float(np.linalg.norm(root))
                distance = float(np.linalg.norm(coords - root))
                row["g_root_distance"] = distance / scale if scale > DEGREE_FLOOR else distance
        if expected is not None:
            setup = setup_template.with_epsilon(orbit.epsilon)
            starts = list(seeds) + ([orbit.fixed_point] if orbit.certified else [])
            result = ls_degree_regular(setup, None, starts, mode_cut, region)
            if result.value is not None:
                row["degree_value"] = result.value
            row["pass"] = bool(row["fixed_point_found"] and row["g_root_distance"] <= 0.05
                               and result.value == expected)
        rows.append(row)

    q_norms = [row["q_norm"] for row in rows]
    smallest = orbits[-1]
    return {
        "rows": rows,
        "g_degree": g_degree,
        "g_root": root,
        "expected_degree": expected,
        "q_decreasing": all(b < a for a, b in zip(q_norms[:-1], q_norms[1:])),
        "q_ratio": (smallest.q_norm / fractional_norm(dec, smallest.fixed_point, "alpha")
                    if smallest.certified else float("nan")),
        "orbits": orbits,
        "passed": rows[-1]["pass"],
    }
