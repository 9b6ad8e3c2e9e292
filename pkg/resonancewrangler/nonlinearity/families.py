"""Built-in nonlinearity families.

arctan and neg_arctan sit in the Landesman-Lazer regime, strong_res and neg_strong_res in the strong-resonance regime, kernel_constant is the forcing that admits no periodic solution at resonance.
"""

import math
import numbers

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from resonancewrangler import nonlinearity
from resonancewrangler.nonlinearity import Nonlinearity, LANDESMAN_LAZER, STRONG_RESONANCE


def _is_real(value):
    return isinstance(value, numbers.Real) and math.isfinite(value)


def _positive(value):
    return _is_real(value) and value > 0


def _constant(value):
    return lambda points: np.full(len(points), value)


def _phase(t, period):
    return np.cos(2.0 * math.pi * np.asarray(t, dtype=float) / period)


def _arctan(params, period):
    a, b = float(params["amplitude"]), float(params["forcing"])
    return Nonlinearity(
        "arctan",
        lambda t, x, s, grad: a * np.arctan(s) - b,
        period,
        bound_m=a * math.pi / 2 + abs(b),
        lipschitz_L=a,
        asymptotics={
            "kind": LANDESMAN_LAZER,
            "g_plus": _constant(a * math.pi / 2 - b),
            "g_minus": _constant(-a * math.pi / 2 - b),
        },
    )


def _strong_res(params, period):
    a, b = float(params["amplitude"]), float(params["forcing"])
    return Nonlinearity(
        "strong_res",
        lambda t, x, s, grad: (a * s + b * _phase(t, period)) / (1.0 + s * s),
        period,
        bound_m=a / 2 + abs(b),
        lipschitz_L=a + 3.0 * math.sqrt(3.0) / 8.0 * abs(b),
        asymptotics={
            "kind": STRONG_RESONANCE,
            "g_infinity": _constant(a),
            "q": _constant(-b * b / (4.0 * a)),
        },
    )


@nonlinearity.register_family("arctan")
class ArctanFamily(object):
    """g = a arctan(s) - b, with limits g+- = +-a pi/2 - b."""

    def _build(self, params, period):
        return _arctan(params, period)

    @nonlinearity.optional_param("amplitude", 1.0)
    def validate_amplitude(value):
        return _positive(value)

    @nonlinearity.optional_param("forcing", 0.0)
    def validate_forcing(value):
        return _is_real(value)


@nonlinearity.register_family("neg_arctan")
class NegArctanFamily(object):
    """The negation of the arctan family."""

    def _build(self, params, period):
        return _arctan(params, period).negated()

    @nonlinearity.optional_param("amplitude", 1.0)
    def validate_amplitude(value):
        return _positive(value)

    @nonlinearity.optional_param("forcing", 0.0)
    def validate_forcing(value):
        return _is_real(value)


@nonlinearity.register_family("strong_res")
class StrongResonanceFamily(object):
    """g = (a s + b cos(2 pi t / T)) / (1 + s^2); g s tends to a and stays above -b^2 / (4a)."""

    def _build(self, params, period):
        return _strong_res(params, period)

    @nonlinearity.optional_param("amplitude", 1.0)
    def validate_amplitude(value):
        return _positive(value)

    @nonlinearity.optional_param("forcing", 0.0)
    def validate_forcing(value):
        return _is_real(value)


@nonlinearity.register_family("neg_strong_res")
class NegStrongResonanceFamily(object):

    def _build(self, params, period):
        return _strong_res(params, period).negated()

    @nonlinearity.optional_param("amplitude", 1.0)
    def validate_amplitude(value):
        return _positive(value)

    @nonlinearity.optional_param("forcing", 0.0)
    def validate_forcing(value):
        return _is_real(value)


@nonlinearity.register_family("periodic_forced_arctan")
class PeriodicForcedArctanFamily(object):
    """g = a (1 + cos(2 pi t / T) / 2) arctan(s) - b. The limits in s depend on t, so no asymptotic data is declared."""

    def _build(self, params, period):
        a, b = float(params["amplitude"]), float(params["forcing"])
        return Nonlinearity(
            "periodic_forced_arctan",
            lambda t, x, s, grad: a * (1.0 + 0.5 * _phase(t, period)) * np.arctan(s) - b,
            period,
            bound_m=1.5 * a * math.pi / 2 + abs(b),
            lipschitz_L=1.5 * a,
        )

    @nonlinearity.optional_param("amplitude", 1.0)
    def validate_amplitude(value):
        return _positive(value)

    @nonlinearity.optional_param("forcing", 0.0)
    def validate_forcing(value):
        return _is_real(value)


@nonlinearity.register_family("gradient_arctan")
class GradientArctanFamily(object):
    """g = a arctan(s) + c arctan(dy/dx_1)."""

    def _build(self, params, period):
        a, c = float(params["amplitude"]), float(params["slope"])

        def pointwise(t, x, s, grad):
            grad = np.asarray(grad, dtype=float)
            first = grad if grad.shape == np.shape(s) else grad[..., 0]
            return a * np.arctan(s) + c * np.arctan(first)

        return Nonlinearity(
            "gradient_arctan",
            pointwise,
            period,
            bound_m=(a + abs(c)) * math.pi / 2,
            lipschitz_L=max(a, abs(c)),
            uses_gradient=True,
        )

    @nonlinearity.optional_param("amplitude", 1.0)
    def validate_amplitude(value):
        return _positive(value)

    @nonlinearity.optional_param("slope", 0.5)
    def validate_slope(value):
        return _is_real(value)


@nonlinearity.register_family("kernel_constant")
class KernelConstantFamily(object):
    """F = amplitude * y0 for a profile y0 given by its interior grid values, independent of t and of the state."""

    def _build(self, params, period):
        amplitude = float(params["amplitude"])
        axes = [np.asarray(axis, dtype=float) for axis in params["axes"]]
        profile = np.asarray(params["profile"], dtype=float).reshape([len(axis) for axis in axes])
        # Zero on the boundary, exact at the nodes.
        full_axes = [np.concatenate([[2 * axis[0] - axis[1]], axis, [2 * axis[-1] - axis[-2]]]) for axis in axes]
        padded = np.pad(profile, 1)
        lookup = RegularGridInterpolator(full_axes, padded, bounds_error=False, fill_value=0.0)

        def pointwise(t, x, s, grad):
            points = np.asarray(x, dtype=float).reshape(len(x), -1)
            return amplitude * lookup(points)

        return Nonlinearity(
            "kernel_constant",
            pointwise,
            period,
            bound_m=abs(amplitude) * float(np.max(np.abs(profile))),
            lipschitz_L=0.0,
        )

    @nonlinearity.required_param("profile")
    def validate_profile(value):
        values = np.asarray(value, dtype=float)
        return values.size > 0 and bool(np.all(np.isfinite(values)))

    @nonlinearity.required_param("axes")
    def validate_axes(value):
        return len(value) in (1, 2) and all(len(axis) >= 2 for axis in value)

    @nonlinearity.optional_param("amplitude", 1.0)
    def validate_amplitude(value):
        return _is_real(value)


def kernel_constant(dec, amplitude=1.0, mode=0, period=1.0):
    """Builds the kernel_constant family along the given kernel eigenvector of a decomposition."""
    profile = dec.kernel_basis[:, mode]
    return nonlinearity.builtin("kernel_constant", period=period, profile=profile,
                                axes=dec.problem.axes(), amplitude=amplitude)
