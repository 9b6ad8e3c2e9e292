import math
import unittest

import numpy as np

from resonancewrangler import elliptic, errors, evolve


def _interval(n=31, coefficient=None):
    return elliptic.EllipticProblem(math.pi, n, coefficient)


def _decomposition(problem, k=None, lambda_target=None, alpha=0.8):
    matrix = elliptic.assemble(problem)
    rtol = elliptic.SNAP_RTOL if lambda_target is None else problem.snap_rtol(lambda_target)
    return elliptic.decompose(matrix, lambda_target, alpha, problem, k=k, rtol=rtol)


class TestAssemble(unittest.TestCase):

    def test_laplacian_closed_form(self):
        problem = _interval(199)
        h = problem.spacing[0]
        mu = np.linalg.eigvalsh(elliptic.assemble(problem).toarray())
        expected = 4.0 / h ** 2 * np.sin(np.arange(1, 200) * h / 2.0) ** 2
        np.testing.assert_allclose(mu, expected, rtol=1e-10)

    def test_rectangle_kronecker_sum(self):
        problem = elliptic.EllipticProblem((math.pi, math.pi), 10)
        h = problem.spacing[0]
        one = 4.0 / h ** 2 * np.sin(np.arange(1, 11) * h / 2.0) ** 2
        mu = np.linalg.eigvalsh(elliptic.assemble(problem).toarray())
        np.testing.assert_allclose(mu, np.sort(np.add.outer(one, one).ravel()), rtol=1e-10)

    def test_variable_coefficient(self):
        problem = _interval(31, lambda x: 1.0 + 0.5 * np.sin(x))
        matrix = elliptic.assemble(problem).toarray()
        np.testing.assert_array_equal(matrix, matrix.T)
        self.assertGreater(np.linalg.eigvalsh(matrix)[0], 0.0)

    def test_non_positive_coefficient(self):
        problem = _interval(31, lambda x: np.cos(x))
        self.assertRaises(errors.EllipticityError, elliptic.assemble, problem)

    def test_grid_too_small(self):
        self.assertRaises(errors.ConfigurationError, elliptic.EllipticProblem, math.pi, 7)

    def test_bad_domain(self):
        self.assertRaises(errors.ConfigurationError, elliptic.EllipticProblem, -1.0, 31)
        self.assertRaises(errors.ConfigurationError, elliptic.EllipticProblem, (1.0, 1.0, 1.0), 31)


class TestDecompose(unittest.TestCase):

    def test_first_eigenvalue(self):
        dec = _decomposition(_interval(), lambda_target=1.0)
        self.assertEqual(dec.k, 1)
        self.assertEqual(len(dec.minus_modes), 0)
        self.assertEqual(dec.kernel_dim, 1)
        self.assertEqual(dec.delta, 0.0)
        self.assertIsNone(dec.gap_minus)

    def test_third_eigenvalue(self):
        dec = _decomposition(_interval(), lambda_target=9.0)
        self.assertEqual(dec.k, 3)
        self.assertEqual(dec.d[2], 2)
        self.assertEqual(list(dec.minus_modes), [0, 1])
        self.assertEqual(list(dec.kernel_modes), [2])
        self.assertAlmostEqual(dec.c, min(dec.gap_minus, dec.gap_plus))

    def test_square_multiplicity(self):
        problem = elliptic.EllipticProblem((math.pi, math.pi), 15)
        dec = _decomposition(problem, lambda_target=5.0)
        self.assertEqual(dec.kernel_dim, 2)
        self.assertEqual(len(dec.minus_modes), 1)
        self.assertEqual(dec.d_k, 3)
        self.assertLessEqual(elliptic.orthonormality_defect(dec), 1e-10)

    def test_mismatch(self):
        self.assertRaises(errors.ResonanceMismatchError, _decomposition, _interval(), lambda_target=2.5)
        self.assertRaises(errors.ResonanceMismatchError, _decomposition, _interval(), k=40)

    def test_alpha_range(self):
        self.assertRaises(errors.ConfigurationError, _decomposition, _interval(), k=1, alpha=0.5)

    def test_classification_total(self):
        dec = _decomposition(_interval(), k=2)
        modes = np.concatenate([dec.minus_modes, dec.kernel_modes, dec.plus_modes])
        self.assertEqual(sorted(modes.tolist()), list(range(dec.size)))
        self.assertEqual(dec.to_frame()["class"].tolist()[:3], ["minus", "kernel", "plus"])

    def test_rates_vanish_on_kernel(self):
        dec = _decomposition(_interval(), k=2)
        self.assertEqual(dec.rates[dec.kernel_modes[0]], 0.0)
        self.assertTrue(np.all(dec.rates[dec.minus_modes] > 0))
        self.assertTrue(np.all(dec.rates[dec.plus_modes] < 0))

    def test_immutable(self):
        dec = _decomposition(_interval(), k=1)
        with self.assertRaises(ValueError):
            dec.eigenvalues[0] = 0.0

    def test_eigen_residual(self):
        problem = _interval(63, lambda x: 1.0 + 0.5 * np.sin(x))
        dec = _decomposition(problem, k=1)
        self.assertLessEqual(elliptic.eigen_residual(dec, elliptic.assemble(problem)), 1e-9)


class TestGridFunction(unittest.TestCase):

    def setUp(self):
        self.dec = _decomposition(_interval(), k=1)
        self.rng = np.random.default_rng(7)

    def test_round_trip(self):
        values = self.rng.standard_normal(self.dec.size)
        u = elliptic.GridFunction.from_values(self.dec, values)
        back = elliptic.GridFunction.from_spectral(self.dec, u.spectral)
        np.testing.assert_allclose(back.values, values, rtol=1e-10, atol=1e-12)

    def test_wrong_length(self):
        self.assertRaises(errors.DimensionError, elliptic.GridFunction.from_values, self.dec, np.zeros(5))

    def test_grid_mismatch(self):
        other = _decomposition(_interval(15), k=1)
        u = elliptic.GridFunction.zeros(other)
        self.assertRaises(errors.DimensionError, elliptic.project, self.dec, u, "P")

    def test_norm_comparison(self):
        for _ in range(20):
            u = elliptic.GridFunction.from_values(self.dec, self.rng.standard_normal(self.dec.size))
            h = elliptic.fractional_norm(self.dec, u, "H")
            a = elliptic.fractional_norm(self.dec, u, "alpha")
            self.assertGreaterEqual(a, (self.dec.eigenvalues[0] + self.dec.delta) ** self.dec.alpha * h * (1 - 1e-12))

    def test_kernel_eigenvector_norms(self):
        e1 = elliptic.GridFunction.from_values(self.dec, self.dec.kernel_basis[:, 0])
        self.assertAlmostEqual(elliptic.fractional_norm(self.dec, e1, "H"), 1.0, places=10)
        self.assertAlmostEqual(elliptic.fractional_norm(self.dec, e1, "alpha"), self.dec.lambda_value ** 0.8, places=10)

    def test_zero_norms(self):
        zero = elliptic.GridFunction.zeros(self.dec)
        self.assertEqual(elliptic.fractional_norm(self.dec, zero, "H"), 0.0)
        self.assertEqual(elliptic.fractional_norm(self.dec, zero, "alpha"), 0.0)

    def test_arithmetic(self):
        u = elliptic.GridFunction.from_values(self.dec, self.rng.standard_normal(self.dec.size))
        v = elliptic.GridFunction.from_values(self.dec, self.rng.standard_normal(self.dec.size))
        np.testing.assert_allclose((2.0 * u - v).values, 2.0 * u.values - v.values, atol=1e-12)
        np.testing.assert_allclose((-u).spectral, -u.spectral)


class TestProjections(unittest.TestCase):

    def setUp(self):
        self.dec = _decomposition(_interval(), k=2)

    def test_kernel_vector(self):
        e = elliptic.GridFunction.from_values(self.dec, self.dec.kernel_basis[:, 0])
        np.testing.assert_allclose(elliptic.project(self.dec, e, "P").values, e.values, atol=1e-12)
        np.testing.assert_allclose(elliptic.project(self.dec, e, "Q+").values, 0.0, atol=1e-12)

    def test_algebra(self):
        self.assertLessEqual(elliptic.projection_audit(self.dec, 100, np.random.default_rng(0)), 1e-10)

    def test_unknown_part(self):
        self.assertRaises(errors.ConfigurationError, elliptic.project, self.dec,
                          elliptic.GridFunction.zeros(self.dec), "R")


class TestDecay(unittest.TestCase):

    def test_all_bounds_hold(self):
        dec = _decomposition(_interval(63), k=2)
        report = elliptic.verify_decay(dec, [0.1, 1.0, 5.0], 50, np.random.default_rng(0))
        for name in ("smoothing_plus", "contraction_plus", "expansion_minus"):
            self.assertEqual(report[name]["status"], "pass", name)
        self.assertLessEqual(report["contraction_plus"]["measured_K"], 1.0 + 1e-10)

    def test_minus_skipped_at_first_eigenvalue(self):
        dec = _decomposition(_interval(), k=1)
        report = elliptic.verify_decay(dec, [0.1, 1.0])
        self.assertEqual(report["expansion_minus"]["status"], "skipped")
        self.assertEqual(report["contraction_plus"]["status"], "pass")

    def test_next_eigenvector_decay(self):
        dec = _decomposition(_interval(), k=1)
        spectral = np.zeros(dec.size)
        spectral[dec.plus_modes[0]] = 1.0
        u = elliptic.GridFunction.from_spectral(dec, spectral)
        start = elliptic.fractional_norm(dec, u, "H")
        for t in (0.1, 1.0, 5.0):
            moved = evolve.semigroup_apply(dec, t, u, shifted=True)
            ratio = elliptic.fractional_norm(dec, moved, "H") / start
            self.assertAlmostEqual(ratio / math.exp(-dec.gap_plus * t), 1.0, delta=1e-10)

    def test_kernel_zero_set(self):
        for k in (1, 2, 3):
            self.assertEqual(elliptic.kernel_zero_audit(_decomposition(_interval(), k=k)), [])
