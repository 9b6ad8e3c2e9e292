"""Translation along trajectories and its fixed points.

Phi_T(eps, x) = u(T; eps, x). A fixed point of Phi_T is the initial value of a T-periodic mild solution; find_fixed_point looks for one by Newton iteration on the lowest modes, with a dense forward-difference Jacobian.
"""

import logging
import math

import numpy as np

from resonancewrangler import errors, evolve
from resonancewrangler.elliptic import GridFunction, fractional_norm, project, smoothing_constant

log = logging.getLogger(__name__)

NEWTON_TOL = 1e-8
MAX_ITERATIONS = 50
DEFAULT_MODE_CUT = 64
SINGULAR_FLOOR = 1e-10
FD_STEP = 1e-6
BLOWUP = 1e10
STEP_LIMIT = 1.0
MIN_STEP_LENGTH = 2.0 ** -10
SUFFICIENT_DECREASE = 1e-4
ORBIT_SAMPLES = 33

CERTIFIED = "certified"
NOT_CONVERGED = "not_converged"
DEGENERATE = "degenerate"
DIVERGED = "diverged"


class PeriodicOrbit(object):
    """The outcome of one fixed-point solve. Only certified orbits carry a trajectory, a Jacobian sign and the Q/P magnitudes."""

    def __init__(self, epsilon, fixed_point, residual, status, iterations, mode_cut,
                 smallest_singular=None, jacobian_sign=None, trajectory=None):
        self.epsilon = epsilon
        self.fixed_point = fixed_point
        self.residual = residual
        self.status = status
        self.iterations = iterations
        self.mode_cut = mode_cut
        self.smallest_singular = smallest_singular
        self.jacobian_sign = jacobian_sign
        self.trajectory = trajectory

    @property
    def certified(self):
        return self.status == CERTIFIED

    @property
    def q_bound(self):
        """max_t ||Q u(t)||_alpha over the trajectory samples."""
        if self.trajectory is None:
            return None
        return float(np.max(self.trajectory.norms("alpha", "Q")))

    @property
    def p_range(self):
        """max_t ||P u(t)||_H over the trajectory samples."""
        if self.trajectory is None:
            return None
        return float(np.max(self.trajectory.norms("H", "P")))

    @property
    def q_norm(self):
        dec = self.fixed_point.dec
        return fractional_norm(dec, project(dec, self.fixed_point, "Q"), "alpha")

    @property
    def p_norm(self):
        dec = self.fixed_point.dec
        return fractional_norm(dec, project(dec, self.fixed_point, "P"), "H")

    def summary(self):
        return {
            "epsilon": self.epsilon,
            "status": self.status,
            "residual": self.residual,
            "iterations": self.iterations,
            "mode_cut": self.mode_cut,
            "jacobian_sign": self.jacobian_sign,
            "q_bound": self.q_bound,
            "p_range": self.p_range,
            "q_norm": self.q_norm,
            "p_norm": self.p_norm,
        }


def poincare_map(setup, x):
    """Phi_T(eps, x): the state reached at time T from x."""
    x = setup.dec.coerce(x)
    return GridFunction.from_spectral(setup.dec, evolve.flow(setup, x.spectral, 0.0, setup.period))


def _jacobian(setup, c, image, m):
    """Forward differences of Phi_T in the first m coefficients, all columns in one batched flow."""
    dec = setup.dec
    scale = FD_STEP * (1.0 + float(np.linalg.norm(dec.alpha_weights * c)))
    batch = np.tile(c, (m, 1))
    batch[np.arange(m), np.arange(m)] += scale
    steps = batch[np.arange(m), np.arange(m)] - c[:m]
    moved = evolve.flow(setup, batch, 0.0, setup.period)
    return ((moved[:, :m] - image[:m]) / steps[:, None]).T


def find_fixed_point(setup, x0, mode_cut=None, tol=NEWTON_TOL, max_iterations=MAX_ITERATIONS):
    """Newton iteration for Phi_T(x) = x on the first mode_cut modes; the remaining modes are carried by the map itself.

    Steps are damped: a step is at most STEP_LIMIT times the size of the current iterate (or 1), and is halved until the residual drops by a factor 1 - SUFFICIENT_DECREASE * length. A singular Newton system away from a fixed point gives a least-squares step.

    Never raises for a failed solve: the returned PeriodicOrbit has status certified, not_converged (including a stalled line search), degenerate (converged, but I - DPhi_T is numerically singular there) or diverged.
    """
    dec = setup.dec
    m = min(DEFAULT_MODE_CUT, dec.size) if mode_cut is None else int(mode_cut)
    if not 0 < m <= dec.size:
        raise errors.ConfigurationError("mode_cut must lie in 1..%d, got %s" % (dec.size, mode_cut))
    c = np.array(dec.coerce(x0).spectral, dtype=float)
    if not np.all(np.isfinite(c)):
        raise errors.ConfigurationError("initial guess is not finite")

    def report(status, iteration, residual, sigma=None, sign=None, trajectory=None):
        return PeriodicOrbit(setup.epsilon, GridFunction.from_spectral(dec, c), residual, status,
                             iteration, m, sigma, sign, trajectory)

    def evaluate(state):
        image = evolve.flow(setup, state, 0.0, setup.period)
        return image, float(np.linalg.norm(dec.alpha_weights * (image - state)))

    residual = None
    try:
        image, residual = evaluate(c)
    except (errors.DivergenceError, errors.NonlinearityDomainError) as e:
        log.warning("eps = %g: integration broke down at the initial guess: %s", setup.epsilon, e)
        return report(DIVERGED, 0, residual)

    weights = dec.alpha_weights[:m]
    for iteration in range(max_iterations + 1):
        try:
            system = np.eye(m) - _jacobian(setup, c, image, m)
        except (errors.DivergenceError, errors.NonlinearityDomainError) as e:
            log.warning("eps = %g: integration broke down after %d Newton steps: %s", setup.epsilon, iteration, e)
            return report(DIVERGED, iteration, residual)

        sigma = float(np.linalg.svd(system, compute_uv=False)[-1])
        log.debug("eps = %g, iteration %d: residual %.3e, smallest singular value %.3e",
                  setup.epsilon, iteration, residual, sigma)
        if residual <= tol:
            if sigma < SINGULAR_FLOOR:
                log.warning("eps = %g: fixed point is degenerate (smallest singular value %.3g)", setup.epsilon, sigma)
                return report(DEGENERATE, iteration, residual, sigma)
            sign = int(np.linalg.slogdet(system)[0])
            trajectory = evolve.integrate(setup, GridFunction.from_spectral(dec, c), setup.period, ORBIT_SAMPLES)
            return report(CERTIFIED, iteration, residual, sigma, sign, trajectory)

        if iteration == max_iterations:
            break
        r = (image - c)[:m]
        if sigma < SINGULAR_FLOOR:
            correction = np.linalg.lstsq(system, r, rcond=SINGULAR_FLOOR)[0]
        else:
            correction = np.linalg.solve(system, r)

        # Backtracking on the residual, with the step capped relative to the current iterate.
        size = float(np.linalg.norm(weights * correction))
        limit = STEP_LIMIT * max(1.0, float(np.linalg.norm(dec.alpha_weights * c)))
        length = min(1.0, limit / size) if size > 0.0 else 1.0
        accepted = None
        while length >= MIN_STEP_LENGTH:
            trial = np.concatenate([c[:m] + length * correction, image[m:]])
            try:
                trial_image, trial_residual = evaluate(trial)
            except (errors.DivergenceError, errors.NonlinearityDomainError):
                trial_residual = math.inf
            if trial_residual < (1.0 - SUFFICIENT_DECREASE * length) * residual:
                accepted = trial, trial_image, trial_residual
                break
            length /= 2.0
        if accepted is None:
            log.warning("eps = %g: Newton stalled after %d steps (residual %.3e)", setup.epsilon, iteration, residual)
            return report(NOT_CONVERGED, iteration, residual, sigma)
        c, image, residual = accepted
        if not np.all(np.isfinite(c)) or np.linalg.norm(dec.alpha_weights * c) > BLOWUP:
            log.warning("eps = %g: Newton iterates left every bounded set", setup.epsilon)
            return report(DIVERGED, iteration + 1, residual)

    log.warning("eps = %g: no convergence in %d Newton steps (residual %.3e)", setup.epsilon, max_iterations, residual)
    return report(NOT_CONVERGED, max_iterations, residual)


def apriori_bound(setup, orbit):
    """Explicit bound R on ||Q u(t)||_alpha for T-periodic solutions, compared with the orbit's q_bound.

    R = m_H K1 T^-alpha (e^{-c1 T}/c1 + T/(1 - alpha)) + m_H C' / gap_minus, with m_H = m sqrt(|Omega|), K1 and c1 = c/2 the smoothing constants on X+, C' the largest (mu + delta)^alpha on X- and the projection norms equal to 1. The second summand vanishes when X- is empty.
    """
    if not orbit.certified:
        raise errors.ConfigurationError("a-priori bound needs a certified orbit, got status %s" % orbit.status)
    dec = setup.dec
    alpha, period = dec.alpha, setup.period
    m_h = setup.nonlinearity.bound_m * math.sqrt(dec.problem.measure)

    plus_term = 0.0
    if len(dec.plus_modes):
        c1 = dec.c / 2.0
        plus_term = m_h * smoothing_constant(dec) * period ** -alpha * (
            math.exp(-c1 * period) / c1 + period / (1.0 - alpha))

    minus_term = 0.0
    if len(dec.minus_modes):
        norm_equivalence = float(np.max(dec.alpha_weights[dec.minus_modes]))
        minus_term = m_h * norm_equivalence / dec.gap_minus

    bound = plus_term + minus_term
    q_bound = orbit.q_bound
    return {
        "R": bound,
        "q_bound": q_bound,
        "slack": bound - q_bound,
        "holds": q_bound <= bound,
        "plus_term": plus_term,
        "minus_term": minus_term,
    }


def sweep_epsilon(setup_template, eps_list, x0, mode_cut=None):
    """Continuation in eps: solves at each eps in descending order, warm-starting from the last certified fixed point. Failures are recorded in the returned orbits and the sweep goes on."""
    eps_list = [float(eps) for eps in eps_list]
    if not eps_list or any(not 0.0 < eps <= 1.0 for eps in eps_list):
        raise errors.ConfigurationError("eps_list must be non-empty with every eps in (0, 1]")

    start = setup_template.dec.coerce(x0)
    orbits = []
    for eps in sorted(eps_list, reverse=True):
        orbit = find_fixed_point(setup_template.with_epsilon(eps), start, mode_cut)
        if orbit.certified:
            start = orbit.fixed_point
            log.debug("eps = %g: ||Q x||_alpha = %.6g, ||P x||_H = %.6g", eps, orbit.q_norm, orbit.p_norm)
        else:
            log.warning("eps = %g: sweep step failed with status %s", eps, orbit.status)
        orbits.append(orbit)
    return orbits
