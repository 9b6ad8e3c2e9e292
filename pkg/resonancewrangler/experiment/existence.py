"""Periodic orbits at full strength eps = 1: the index formula, the Landesman-Lazer and strong-resonance criteria, and the kernel forcing that has no periodic solution."""

import logging

import numpy as np
import pandas as pd

from resonancewrangler import conditions, degree, evolve, poincare
from resonancewrangler.elliptic import GridFunction, fractional_norm, project
from resonancewrangler.experiment import Check, register_experiment
from resonancewrangler.nonlinearity import LANDESMAN_LAZER, STRONG_RESONANCE

log = logging.getLogger(__name__)

DRIFT_TOLERANCE = 1e-9
ORDER_RANGES = {"etd2rk": (1.7, 2.3), "euler": (0.7, 1.3)}
TAIL_LIMIT = 0.05


def _drift(setup, x, y0):
    """||P(Phi_T(x) - x) - eps T y0||_H."""
    dec = setup.dec
    moved = poincare.poincare_map(setup, x) - x
    expected = GridFunction.from_values(dec, setup.epsilon * setup.period * y0)
    return fractional_norm(dec, project(dec, moved, "P") - project(dec, expected, "P"), "H")


@register_experiment("nonexistence")
class Nonexistence(object):

    _description = "A forcing constant along a kernel eigenvector: the kernel component drifts by T y0 per period, so Newton never certifies a fixed point."

    def run(self, bench):
        if bench.config.family != "kernel_constant":
            return [Check("family", False, "nonexistence needs the kernel_constant family, got %s" % bench.config.family)]
        dec, nl = bench.dec, bench.nonlinearity
        setup = bench.setup(1.0)
        y0 = nl(0.0, dec.problem.nodes, np.zeros(dec.size), np.zeros(dec.size))

        rows = []
        for index, seed in enumerate(bench.seeds()):
            drift = _drift(setup, seed, y0)
            orbit = poincare.find_fixed_point(setup, seed, bench.config.mode_cut)
            rows.append({"seed": index, "seed_norm": fractional_norm(dec, seed, "alpha"), "drift": drift,
                         "status": orbit.status, "iterations": orbit.iterations,
                         "residual": orbit.residual if orbit.residual is not None else float("nan")})
        bench.table("nonexistence.csv", pd.DataFrame(rows), "kernel drift and Newton outcome per seed")

        worst = max(row["drift"] for row in rows)
        certified = sum(row["status"] == poincare.CERTIFIED for row in rows)
        km = degree.KernelMap(dec, nl)
        g_degree = degree.brouwer_degree(km, bench.config.u_radius).value if dec.kernel_dim <= 2 else None
        return [
            Check("kernel_drift", worst <= DRIFT_TOLERANCE, "max |P(Phi_T x - x) - T y0| = %.3g" % worst),
            Check("no_fixed_point", certified == 0, "%d of %d seeds certified" % (certified, len(rows))),
            Check("averaged_degree", g_degree in (0, None), "deg_B(g, U) = %s" % g_degree),
        ]


def smooth_start(dec, modes=8):
    """A smooth state on the lowest modes, coefficients 1/j^2."""
    spectral = np.zeros(dec.size)
    low = min(modes, dec.size)
    spectral[:low] = 1.0 / np.arange(1, low + 1) ** 2
    return GridFunction.from_spectral(dec, spectral)


def integrator_checks(bench, setup, u0):
    """Self-convergence order, continuity in the data and tail energy of the integrator on the configured problem. The order is measured from smooth_start, the other two from u0."""
    dec = setup.dec
    checks = []
    order = evolve.convergence_order(setup, smooth_start(dec))
    low, high = ORDER_RANGES[setup.scheme]
    checks.append(Check("convergence_order", low <= order["order"] <= high,
                        "%s order %.3f in [%g, %g]" % (setup.scheme, order["order"], low, high)))

    direction = bench.rng.standard_normal(dec.size)
    perturbation = GridFunction.from_spectral(dec, 1e-6 * direction / np.linalg.norm(direction * dec.alpha_weights))
    sensitivity = evolve.sensitivity(setup, u0, perturbation)
    checks.append(Check("continuity_in_data", sensitivity["measured"] <= sensitivity["bound"],
                        "C = %.4g <= %.4g" % (sensitivity["measured"], sensitivity["bound"])))

    start = GridFunction.from_values(dec, bench.rng.standard_normal(dec.size))
    trajectory = evolve.integrate(setup, start, setup.period, 33)
    cut = max(1, int(0.8 * dec.size))
    tail = evolve.tail_energy(dec, trajectory, cut, t_start=0.5 * setup.period)
    checks.append(Check("tail_energy", tail <= TAIL_LIMIT, "%.3g above mode %d" % (tail, cut)))
    return checks


class OrbitCriterion(object):
    """Shared driver: decide the regime, certify an orbit at eps = 1 and compare its index with the formula."""

    def regime(self, bench):
        """Returns (condition reports, which side holds: 1, 2 or None)."""
        raise NotImplementedError

    def run(self, bench):
        config, dec = bench.config, bench.dec
        checks = []
        reports, side = self.regime(bench)
        for report in reports:
            checks.append(Check("condition_%s" % report.condition, True,
                                "%s (margin %.4g)" % (report.holds, report.margin)))
        checks.append(Check("regime", side is not None,
                            "side %s holds" % side if side is not None else "no sufficient condition holds"))
        bench.table("conditions.csv", pd.DataFrame([r.summary() for r in reports]).astype({"witness": str}),
                    "condition reports")
        if side is None:
            return checks
        expected = (-1) ** (dec.d_k if side == 1 else dec.d[dec.k - 1])

        setup = bench.setup(1.0)
        seeds = bench.seeds()
        orbit = None
        for seed in seeds:
            candidate = poincare.find_fixed_point(setup, seed, config.mode_cut)
            if candidate.certified:
                orbit = candidate
                break
        checks.append(Check("certified_orbit", orbit is not None,
                            "residual %.3g" % orbit.residual if orbit else "no seed converged"))
        if orbit is None:
            return checks

        checks.append(Check("index_sign", orbit.jacobian_sign == expected,
                            "sign det(I - DPhi_T) = %+d, expected %+d" % (orbit.jacobian_sign, expected)))
        wider = poincare.find_fixed_point(setup, orbit.fixed_point, config.mode_cut_check)
        checks.append(Check("index_sign_stable", wider.certified and wider.jacobian_sign == orbit.jacobian_sign,
                            "mode_cut %d -> %d: %s" % (config.mode_cut, config.mode_cut_check, wider.jacobian_sign)))

        bound = poincare.apriori_bound(setup, orbit)
        checks.append(Check("apriori_bound", bound["holds"] and bound["slack"] > 0,
                            "q_bound %.4g <= R %.4g (slack %.4g)" % (bound["q_bound"], bound["R"], bound["slack"])))
        closing = fractional_norm(dec, orbit.trajectory.states[0] - orbit.trajectory.final, "alpha")
        checks.append(Check("periodicity", closing <= 2.0 * orbit.residual + 1e-14,
                            "||u(0) - u(T)||_alpha = %.3g" % closing))

        result = degree.ls_degree_regular(setup, config.ball_radius, seeds + [orbit.fixed_point], config.mode_cut)
        checks.append(Check("degree_sum", result.value == expected and not result.ambiguous,
                            "%s over %s fixed points, expected %+d" % (result.value, result.count, expected)))

        checks.extend(integrator_checks(bench, setup, orbit.fixed_point))

        record = orbit.summary()
        record.update({"R": bound["R"], "slack": bound["slack"], "expected_sign": expected, "degree_sum": result.value})
        bench.table("orbit_summary.csv", pd.DataFrame([record]), "certified orbit at eps = 1")
        bench.table("orbit.csv", orbit.trajectory.to_frame("values"), "orbit samples over one period")
        return checks


def _side(first, second):
    if first.holds == conditions.YES:
        return 1
    if second.holds == conditions.YES:
        return 2
    return None


@register_experiment("ll_criterion")
class LandesmanLazerCriterion(OrbitCriterion):

    _description = "LL1 or LL2 holds, so a periodic orbit exists with index (-1)^{d_k} or (-1)^{d_{k-1}}."

    def regime(self, bench):
        first = conditions.check_landesman_lazer(bench.dec, bench.nonlinearity, "LL1")
        second = conditions.check_landesman_lazer(bench.dec, bench.nonlinearity, "LL2")
        return [first, second], _side(first, second)


@register_experiment("sr_criterion")
class StrongResonanceCriterion(OrbitCriterion):

    _description = "SR1 or SR2 holds, so a periodic orbit exists with index (-1)^{d_k} or (-1)^{d_{k-1}}."

    def regime(self, bench):
        first = conditions.check_strong_resonance(bench.dec, bench.nonlinearity, "SR1", rng=bench.rng)
        second = conditions.check_strong_resonance(bench.dec, bench.nonlinearity, "SR2", rng=bench.rng)
        return [first, second], _side(first, second)


@register_experiment("index_formula")
class IndexFormula(OrbitCriterion):

    _description = "G1 or G2 holds on the sampled sets, so deg_LS(I - Phi_T, B(0, R)) is (-1)^{d_k} or (-1)^{d_{k-1}}."

    def regime(self, bench):
        config, dec, nl = bench.config, bench.dec, bench.nonlinearity
        asymptotics = nl.asymptotics or {}
        reports = []
        if asymptotics.get("kind") == LANDESMAN_LAZER:
            reports = [conditions.check_landesman_lazer(dec, nl, which) for which in ("LL1", "LL2")]
        elif asymptotics.get("kind") == STRONG_RESONANCE:
            reports = [conditions.check_strong_resonance(dec, nl, which, rng=bench.rng) for which in ("SR1", "SR2")]
        geometric = [conditions.check_geometric(dec, nl, which, config.b_radius, config.r_grid, rng=bench.rng)
                     for which in ("G1", "G2")]
        side = _side(*geometric)
        if side is None and reports:
            side = _side(*reports)
        return reports + geometric, side
