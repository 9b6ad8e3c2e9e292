"""Resonant averaging: small eps, fixed points near the zeros of the averaged kernel map, and the degree identity."""

import numpy as np
import pandas as pd

from resonancewrangler import degree, errors, poincare
from resonancewrangler.experiment import Check, register_experiment

Q_RATIO_LIMIT = 0.05
CONTROL_MU = 0.1


@register_experiment("averaging_sweep")
class AveragingSweep(object):

    _description = "Sweeps eps downwards and checks that fixed points exist in U + V, approach a zero of g and carry the degree (-1)^{d_k} deg_B(g, U)."

    def run(self, bench):
        config, dec = bench.config, bench.dec
        template = bench.setup(max(config.eps_list))
        report = degree.averaging_experiment(template, config.eps_list, config.u_radius, config.v_radius,
                                             bench.seeds(), config.mode_cut)
        rows = report["rows"]
        bench.table("averaging.csv", pd.DataFrame(rows, columns=[
            "eps", "fixed_point_found", "q_norm", "kernel_coord", "g_root_distance",
            "degree_value", "expected_degree", "pass"]), "averaging sweep, one row per eps")

        km = degree.KernelMap(dec, bench.nonlinearity)
        root = report["g_root"]
        trace = []
        for orbit in report["orbits"]:
            row = {"eps": orbit.epsilon, "status": orbit.status}
            coords = km.coordinates(orbit.fixed_point) if orbit.certified else np.full(dec.kernel_dim, np.nan)
            for i, value in enumerate(coords):
                row["z_%d" % i] = value
                row["root_%d" % i] = root[i] if root is not None else np.nan
            trace.append(row)
        bench.table("kernel_trace.csv", pd.DataFrame(trace), "kernel coordinates of the fixed points")

        checks = []
        g_degree = report["g_degree"]
        if not g_degree:
            found = any(row["fixed_point_found"] for row in rows)
            checks.append(Check("averaged_degree", True, "deg_B(g, U) = %s: existence not claimed" % g_degree))
            checks.append(Check("consistent_nonexistence", root is not None or not found,
                                "fixed point in U + V: %s" % found))
            return checks

        checks.append(Check("averaged_degree", True, "deg_B(g, U) = %d, root %s" % (g_degree, np.round(root, 8).tolist()
                                                                                  if root is not None else None)))
        for row in rows:
            checks.append(Check("eps_%g" % row["eps"], row["pass"] or row is not rows[-1],
                                "found %s, ||Qx||_alpha %.4g, root distance %.3g, degree %s (expected %s)%s"
                                % (row["fixed_point_found"], row["q_norm"], row["g_root_distance"],
                                   row["degree_value"], row["expected_degree"],
                                   "" if row["pass"] else ", recorded failure")))
        checks.append(Check("q_decreasing", report["q_decreasing"], "||Q x*||_alpha decreases as eps decreases"))
        checks.append(Check("q_ratio", report["q_ratio"] <= Q_RATIO_LIMIT,
                            "||Q x*|| / ||x*|| = %.4g at eps = %g" % (report["q_ratio"], rows[-1]["eps"])))

        for orbit in report["orbits"]:
            if orbit.certified:
                bound = poincare.apriori_bound(template.with_epsilon(orbit.epsilon), orbit)
                checks.append(Check("apriori_bound_eps_%g" % orbit.epsilon, bound["holds"] and bound["slack"] > 0,
                                    "q_bound %.4g <= R %.4g" % (bound["q_bound"], bound["R"])))

        relation = degree.sign_relation(km, config.u_radius)
        checks.append(Check("sign_relation", relation["holds"], "deg(-g) = %d, (-1)^dim deg(g) = %d"
                            % (relation["negated_degree"], relation["expected"])))
        try:
            control = degree.translation_degree(km, config.u_radius, CONTROL_MU)
            checks.append(Check("finite_dimensional_control", control["holds"],
                                "deg(I - Theta) = %d, deg(-g) = %d" % (control["translation"], control["averaged"])))
        except (errors.DegreeUndefinedError, errors.ResolutionError) as e:
            checks.append(Check("finite_dimensional_control", False, str(e)))

        smallest = report["orbits"][-1]
        if smallest.certified:
            bench.table("orbit.csv", smallest.trajectory.to_frame("values"), "orbit at the smallest eps")
        return checks
