"""The nonlinearity and the conditions it satisfies, without solving for orbits."""

import math

import numpy as np
import pandas as pd

from resonancewrangler import conditions, nonlinearity
from resonancewrangler.elliptic import GridFunction, fractional_norm
from resonancewrangler.experiment import Check, register_experiment
from resonancewrangler.nonlinearity import LANDESMAN_LAZER, STRONG_RESONANCE

PERIODICITY_TOLERANCE = 1e-10
DECLARED_TOLERANCE = 1e-9


@register_experiment("conditions_audit")
class ConditionsAudit(object):

    _description = "Checks the declared constants of the nonlinearity and samples G1/G2 with whichever of LL1/LL2 or SR1/SR2 its asymptotics allow."

    def run(self, bench):
        config, dec, nl = bench.config, bench.dec, bench.nonlinearity
        problem = dec.problem
        checks = []

        samples = nonlinearity.sample_invariants(nl, problem, rng=bench.rng)
        checks.append(Check("periodicity", samples["periodicity"] <= PERIODICITY_TOLERANCE,
                            "max |g(t + T) - g(t)| = %.3g" % samples["periodicity"]))
        checks.append(Check("declared_bound", samples["bound"] <= DECLARED_TOLERANCE,
                            "excess over m = %.3g" % samples["bound"]))
        checks.append(Check("declared_lipschitz", samples["lipschitz"] <= DECLARED_TOLERANCE,
                            "excess over L = %.3g" % samples["lipschitz"]))

        limit = nl.bound_m * math.sqrt(problem.measure)
        largest = 0.0
        for _ in range(100):
            u = GridFunction.from_values(dec, 5.0 * bench.rng.standard_normal(dec.size))
            largest = max(largest, fractional_norm(dec, nonlinearity.apply(nl, dec, 0.0, u), "H"))
        checks.append(Check("niemytzki_bound", largest <= limit * (1.0 + 1e-12),
                            "||F(u)||_H <= %.4g, m sqrt|Omega| = %.4g" % (largest, limit)))

        factor = 1.0 + nonlinearity.gradient_operator_norm(problem) if nl.uses_gradient else 1.0
        measured = nonlinearity.measured_lipschitz(nl, dec, 100, bench.rng)
        checks.append(Check("niemytzki_lipschitz", measured <= nl.lipschitz_L * factor * (1.0 + 1e-12),
                            "measured %.4g, allowed %.4g" % (measured, nl.lipschitz_L * factor)))

        reports = [conditions.check_geometric(dec, nl, which, config.b_radius, config.r_grid, rng=bench.rng)
                   for which in ("G1", "G2")]
        g1, g2 = reports
        checks.append(Check("geometric_exclusive", not (g1.holds == conditions.YES and g2.holds == conditions.YES),
                            "G1 %s, G2 %s" % (g1.holds, g2.holds)))

        kind = (nl.asymptotics or {}).get("kind")
        if kind == LANDESMAN_LAZER:
            criteria = [conditions.check_landesman_lazer(dec, nl, which) for which in ("LL1", "LL2")]
        elif kind == STRONG_RESONANCE:
            criteria = [conditions.check_strong_resonance(dec, nl, which, rng=bench.rng) for which in ("SR1", "SR2")]
        else:
            criteria = []
        for criterion, geometric in zip(criteria, reports):
            implied = criterion.holds != conditions.YES or geometric.holds == conditions.YES
            checks.append(Check("%s_implies_%s" % (criterion.condition, geometric.condition), implied,
                                "%s %s, %s %s" % (criterion.condition, criterion.holds,
                                                  geometric.condition, geometric.holds)))
        reports.extend(criteria)

        frame = pd.DataFrame([report.summary() for report in reports])
        frame["witness"] = frame["witness"].astype(str)
        bench.table("conditions.csv", frame, "condition reports")
        margins = []
        for report in reports[:2]:
            for radius, margin in zip(report.details["r_grid"], report.details["margins"]):
                margins.append({"condition": report.condition, "R": radius, "margin": margin})
        bench.table("geometric_margins.csv", pd.DataFrame(margins), "normalized pairing margins per radius")
        return checks
