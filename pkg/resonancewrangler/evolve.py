"""Mild solutions of u' = -A u + lambda u + eps F(t, u) by exponential time differencing on the eigenbasis.

The linear part is integrated exactly mode by mode with the shifted rates z_j = lambda - mu_j, which vanish on the kernel. The nonlinear convolution is approximated with phi-function weights (exponential Euler or ETD2RK).
"""

import logging
import math

import numpy as np
import pandas as pd

from resonancewrangler import errors, nonlinearity
from resonancewrangler.elliptic import GridFunction, fractional_norm

log = logging.getLogger(__name__)

SCHEMES = ("euler", "etd2rk")
STEPS_PER_PERIOD = 512
TAYLOR_CUTOFF = 1e-4
TAYLOR_TERMS = 5
GROUP_FLOOR = 1e-12
ROUNDOFF_FLOOR = 1e-13


def phi_functions(z):
    """phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2, with a Taylor fallback for |z| < TAYLOR_CUTOFF."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < TAYLOR_CUTOFF
    safe = np.where(small, 1.0, z)
    direct1 = np.expm1(safe) / safe
    direct2 = (np.expm1(safe) - safe) / safe ** 2
    series1 = sum(z ** j / math.factorial(j + 1) for j in range(TAYLOR_TERMS))
    series2 = sum(z ** j / math.factorial(j + 2) for j in range(TAYLOR_TERMS))
    return np.where(small, series1, direct1), np.where(small, series2, direct2)


class EvolutionSetup(object):
    """The data of one evolution: decomposition, nonlinearity, homotopy weight eps, step dt and scheme."""

    def __init__(self, dec, nl, epsilon, dt=None, scheme="etd2rk"):
        if not 0.0 <= epsilon <= 1.0:
            raise errors.ConfigurationError("epsilon must lie in [0, 1], got %s" % epsilon)
        if scheme not in SCHEMES:
            raise errors.ConfigurationError("unknown scheme %r, expected one of %s" % (scheme, ", ".join(SCHEMES)))
        dt = nl.period / STEPS_PER_PERIOD if dt is None else float(dt)
        if not dt > 0:
            raise errors.ConfigurationError("dt must be positive, got %s" % dt)

        self._dec = dec
        self._nl = nl
        self._epsilon = float(epsilon)
        self._dt = dt
        self._scheme = scheme
        self._weights = {}

    @property
    def dec(self):
        return self._dec

    @property
    def nonlinearity(self):
        return self._nl

    @property
    def epsilon(self):
        return self._epsilon

    @property
    def lambda_value(self):
        return self._dec.lambda_value

    @property
    def dt(self):
        return self._dt

    @property
    def scheme(self):
        return self._scheme

    @property
    def period(self):
        return self._nl.period

    def with_epsilon(self, epsilon):
        return EvolutionSetup(self._dec, self._nl, epsilon, self._dt, self._scheme)

    def with_dt(self, dt):
        return EvolutionSetup(self._dec, self._nl, self._epsilon, dt, self._scheme)

    def weights(self, h):
        """Returns (e^{z h}, h phi1(z h), h phi2(z h)) per mode, cached by step size."""
        if h not in self._weights:
            zh = self._dec.rates * h
            phi1, phi2 = phi_functions(zh)
            self._weights[h] = (np.exp(zh), h * phi1, h * phi2)
        return self._weights[h]

    def forcing(self, t, coefficients):
        """Spectral coefficients of eps F(t, u) for u given by its coefficients."""
        if self._epsilon == 0.0:
            return np.zeros_like(coefficients)
        values = self._dec.to_values(coefficients)
        return self._epsilon * self._dec.to_spectral(nonlinearity.evaluate(self._nl, self._dec.problem, t, values))


def advance(setup, t, coefficients, h):
    """One ETD step of size h from time t on spectral coefficients."""
    decay, w1, w2 = setup.weights(h)
    f0 = setup.forcing(t, coefficients)
    predicted = decay * coefficients + w1 * f0
    if setup.scheme == "euler":
        out = predicted
    else:
        out = predicted + w2 * (setup.forcing(t + h, predicted) - f0)
    if not np.all(np.isfinite(out)):
        raise errors.DivergenceError(t + h)
    return out


def flow(setup, coefficients, t0, t1):
    """Carries coefficients from t0 to t1 with uniform substeps no longer than dt."""
    span = t1 - t0
    if span <= 0:
        return np.array(coefficients, dtype=float)
    count = max(1, int(math.ceil(span / setup.dt - 1e-9)))
    h = span / count
    out = np.array(coefficients, dtype=float)
    for i in range(count):
        out = advance(setup, t0 + i * h, out, h)
    return out


def semigroup_apply(dec, t, u, shifted=False):
    """Applies S_A(t), or e^{lambda t} S_A(t) when shifted, mode by mode.

    Negative t is a group extension and is only allowed on X- + X0.
    """
    u = dec.coerce(u)
    if t < 0:
        plus = u.spectral[dec.plus_modes]
        if plus.size and np.max(np.abs(plus)) > GROUP_FLOOR:
            raise errors.GroupExtensionError("backward evolution of a state with an X+ component (%.3g)" % np.max(np.abs(plus)))
        keep = np.ones(dec.size, dtype=bool)
        keep[dec.plus_modes] = False
        rates = dec.rates if shifted else -dec.eigenvalues
        factors = np.where(keep, np.exp(np.where(keep, rates, 0.0) * t), 0.0)
    else:
        factors = np.exp(dec.rates * t) if shifted else np.exp(-dec.eigenvalues * t)
    return GridFunction.from_spectral(dec, factors * u.spectral)


def step(setup, t, u):
    """One step of size dt from time t."""
    u = setup.dec.coerce(u)
    return GridFunction.from_spectral(setup.dec, advance(setup, t, u.spectral, setup.dt))


class Trajectory(object):
    """Samples of a mild solution at increasing times."""

    def __init__(self, dec, times, coefficients, scheme, dt, epsilon):
        self._dec = dec
        self._times = np.asarray(times, dtype=float)
        self._coefficients = np.asarray(coefficients, dtype=float)
        self.scheme = scheme
        self.dt = dt
        self.epsilon = epsilon

    @property
    def times(self):
        return self._times

    @property
    def coefficients(self):
        """Spectral coefficients, one row per sample."""
        return self._coefficients

    @property
    def states(self):
        return [GridFunction.from_spectral(self._dec, row) for row in self._coefficients]

    @property
    def final(self):
        return GridFunction.from_spectral(self._dec, self._coefficients[-1])

    def norms(self, which="alpha", part=None):
        """Norm of each sample, optionally of one projection (P, Q-, Q+ or Q)."""
        rows = self._coefficients
        if part is not None:
            rows = np.where(self._dec.mask(part), rows, 0.0)
        if which == "alpha":
            rows = rows * self._dec.alpha_weights
        return np.linalg.norm(rows, axis=1)

    def to_frame(self, columns="values", count=16):
        """Time column plus grid values (u_0, u_1, ...) or the first count spectral coefficients (c_0, ...)."""
        frame = pd.DataFrame({"time": self._times})
        if columns == "values":
            data = self._coefficients @ self._dec.basis.T
            names = ["u_%d" % i for i in range(data.shape[1])]
        elif columns == "spectral":
            data = self._coefficients[:, :count]
            names = ["c_%d" % i for i in range(data.shape[1])]
        else:
            raise errors.ConfigurationError("trajectory columns must be 'values' or 'spectral'")
        return pd.concat([frame, pd.DataFrame(data, columns=names)], axis=1)


def integrate(setup, u0, t_final, n_samples=2):
    """Integrates from 0 to t_final, sampling at n_samples uniform times (both ends included)."""
    if not t_final > 0:
        raise errors.ConfigurationError("t_final must be positive")
    if n_samples < 2:
        raise errors.ConfigurationError("n_samples must be at least 2")
    u0 = setup.dec.coerce(u0)
    times = np.linspace(0.0, t_final, n_samples)
    rows = [np.array(u0.spectral)]
    for t0, t1 in zip(times[:-1], times[1:]):
        rows.append(flow(setup, rows[-1], t0, t1))
    return Trajectory(setup.dec, times, np.array(rows), setup.scheme, setup.dt, setup.epsilon)


def tail_energy(dec, traj, mode_cut, t_start=None):
    """Largest fraction of the alpha-energy carried by modes at or above mode_cut, over samples with t >= t_start (default: the first positive sample)."""
    if not 0 < mode_cut < dec.size:
        raise errors.ConfigurationError("mode_cut must lie in 1..%d" % (dec.size - 1))
    times = traj.times
    if t_start is None:
        t_start = times[times > 0][0]
    weighted = (traj.coefficients * dec.alpha_weights) ** 2
    total = weighted.sum(axis=1)
    tail = weighted[:, mode_cut:].sum(axis=1)
    fractions = np.divide(tail, total, out=np.zeros_like(tail), where=total > 0)
    selected = fractions[times >= t_start]
    return float(selected.max()) if selected.size else 0.0


def sensitivity(setup, u0, perturbation, t_final=None, n_samples=33):
    """Continuity in the data: integrates from u0 and u0 + perturbation and compares.

    Returns a dict with the measured constant sup_t ||difference(t)||_alpha / ||perturbation||_alpha and the discrete Gronwall bound cond_alpha * exp((max z + eps L_eff) T), where cond_alpha = ((mu_max + delta)/(mu_1 + delta))^alpha and L_eff is the H-Lipschitz constant of F.
    """
    dec = setup.dec
    t_final = setup.period if t_final is None else t_final
    base = integrate(setup, u0, t_final, n_samples)
    moved = integrate(setup, dec.coerce(u0) + perturbation, t_final, n_samples)
    size = fractional_norm(dec, perturbation, "alpha")
    difference = np.linalg.norm((moved.coefficients - base.coefficients) * dec.alpha_weights, axis=1)

    nl = setup.nonlinearity
    lipschitz = nl.lipschitz_L
    if nl.uses_gradient:
        lipschitz *= 1.0 + nonlinearity.gradient_operator_norm(dec.problem)
    weights = dec.alpha_weights
    condition = float(weights[-1] / weights[0])
    growth = max(float(np.max(dec.rates)), 0.0) + setup.epsilon * lipschitz
    return {
        "measured": float(np.max(difference) / size),
        "bound": condition * math.exp(growth * t_final),
        "perturbation": size,
    }


def convergence_order(setup, u0, t_final=None, dt=None):
    """Self-convergence of the scheme: runs dt, dt/2, dt/4, dt/8 and returns the orders log2 of successive-difference ratios in the alpha-norm.

    The order is nan when the differences sit at roundoff level, as they do from an equilibrium.
    """
    dec = setup.dec
    t_final = setup.period if t_final is None else t_final
    dt = setup.period / 32.0 if dt is None else dt
    start = dec.coerce(u0).spectral
    finals = [flow(setup.with_dt(dt / 2 ** i), start, 0.0, t_final) for i in range(4)]
    differences = [float(np.linalg.norm((finals[i] - finals[i + 1]) * dec.alpha_weights)) for i in range(3)]
    floor = ROUNDOFF_FLOOR * max(1.0, float(np.linalg.norm(finals[-1] * dec.alpha_weights)))
    if min(differences) <= floor:
        log.warning("self-convergence differences %s are at roundoff level, no order measured", differences)
        return {"differences": differences, "orders": [math.nan, math.nan], "order": math.nan}
    orders = [math.log2(differences[i] / differences[i + 1]) for i in range(2)]
    log.debug("self-convergence differences %s, orders %s", differences, orders)
    return {"differences": differences, "orders": orders, "order": float(np.mean(orders))}
