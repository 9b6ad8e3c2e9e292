"""The spectral splitting on its own: closed forms, orthonormality, projection algebra, decay bounds and linear degree counts."""

import numpy as np
import pandas as pd

from resonancewrangler import degree, elliptic
from resonancewrangler.experiment import Check, register_experiment

TOLERANCE = 1e-10
RESIDUAL_TOLERANCE = 1e-9
DECAY_TIMES = (0.1, 1.0, 5.0)


def closed_form_eigenvalues(problem, scale=1.0):
    """Eigenvalues of the discrete Dirichlet Laplacian (times a constant coefficient), ascending."""
    per_axis = [4.0 / h ** 2 * np.sin(np.arange(1, problem.grid_size + 1) * h * np.pi / (2.0 * length)) ** 2
                for h, length in zip(problem.spacing, problem.lengths)]
    values = per_axis[0]
    for other in per_axis[1:]:
        values = np.add.outer(values, other).ravel()
    return np.sort(scale * values)


@register_experiment("spectral_audit")
class SpectralAudit(object):

    _description = "Checks the discrete operator, its eigenbasis and the splitting X- + X0 + X+ around the resonance eigenvalue."

    def run(self, bench):
        config, dec, matrix = bench.config, bench.dec, bench.matrix
        checks = []
        summary = dec.summary()
        checks.append(Check("splitting", True, "k = %d, lambda = %.10g, dim X- = %d, dim X0 = %d, delta = %g"
                            % (dec.k, dec.lambda_value, summary["dim_minus"], summary["dim_kernel"], dec.delta)))

        if config.coefficient_kind == "constant":
            expected = closed_form_eigenvalues(bench.problem, config.coefficient_value)
            error = float(np.max(np.abs(dec.eigenvalues - expected) / expected))
            checks.append(Check("closed_form", error <= TOLERANCE, "max relative error %.3g" % error))
        else:
            smallest = float(dec.eigenvalues[0])
            checks.append(Check("positivity", smallest > 0, "smallest eigenvalue %.6g" % smallest))

        residual = elliptic.eigen_residual(dec, matrix)
        checks.append(Check("eigen_residual", residual <= RESIDUAL_TOLERANCE, "%.3g" % residual))
        defect = elliptic.orthonormality_defect(dec)
        checks.append(Check("orthonormality", defect <= TOLERANCE, "Gram defect %.3g" % defect))
        algebra = elliptic.projection_audit(dec, 100, bench.rng)
        checks.append(Check("projection_algebra", algebra <= TOLERANCE, "worst identity defect %.3g" % algebra))

        decay = elliptic.verify_decay(dec, DECAY_TIMES, 50, bench.rng)
        for name, verdict in sorted(decay.items()):
            if verdict["status"] == "skipped":
                checks.append(Check(name, True, "skipped: %s" % verdict["reason"]))
            else:
                checks.append(Check(name, verdict["status"] == "pass", "measured K %.6g <= %.6g (c = %.6g)"
                                    % (verdict["measured_K"], verdict["allowed_K"], verdict["c"])))
        bench.table("decay.csv", pd.DataFrame([
            {"inequality": name, "status": v["status"], "measured_K": v["measured_K"],
             "allowed_K": v["allowed_K"], "c": v["c"]} for name, v in sorted(decay.items())]),
            "decay inequalities on random vectors")

        zeros = elliptic.kernel_zero_audit(dec)
        checks.append(Check("kernel_zero_set", not zeros, "%d adjacent near-zero node pairs" % len(zeros)))

        rows = []
        for k in range(1, min(3, len(dec.clusters)) + 1):
            other = dec if k == dec.k else elliptic.decompose(matrix, None, dec.alpha, bench.problem, k=k)
            count = degree.linear_degree_count(other, config.period, config.mode_cut)
            full = degree.linear_degree_count(other, config.period)
            expected = (-1) ** other.d[k - 1]
            rows.append({"k": k, "d_k_minus_1": other.d[k - 1], "count": count, "full_count": full, "expected": expected})
            checks.append(Check("linear_degree_k%d" % k, count == expected == full,
                                "%+d (all modes %+d), expected %+d" % (count, full, expected)))
        bench.table("linear_degree.csv", pd.DataFrame(rows), "linear degree counts")

        if dec.kernel_dim == 2:
            identity = degree.VectorField(lambda z: z, 2)
            value = degree.brouwer_degree(identity, 1.0).value
            antipodal = degree.brouwer_degree(degree.negated(identity), 1.0).value
            checks.append(Check("winding_identity", value == 1 and antipodal == 1,
                                "deg(id) = %d, deg(-id) = %d" % (value, antipodal)))

        bench.table("spectrum.csv", dec.to_frame(), "eigenvalues and mode classes")
        return checks
