import math
import unittest

import numpy as np

from resonancewrangler import elliptic, errors, evolve, nonlinearity, poincare
from resonancewrangler.nonlinearity import families


def _decomposition(n=15, k=1):
    problem = elliptic.EllipticProblem(math.pi, n)
    return elliptic.decompose(elliptic.assemble(problem), None, 0.8, problem, k=k)


class TestPoincareMap(unittest.TestCase):

    def test_linear_map(self):
        dec = _decomposition()
        setup = evolve.EvolutionSetup(dec, nonlinearity.builtin("arctan"), 0.0)
        x = elliptic.GridFunction.from_values(dec, np.random.default_rng(0).standard_normal(dec.size))
        expected = evolve.semigroup_apply(dec, 1.0, x, shifted=True)
        np.testing.assert_allclose(poincare.poincare_map(setup, x).spectral, expected.spectral, atol=1e-12)

    def test_unforced_map_is_linear(self):
        dec = _decomposition()
        setup = evolve.EvolutionSetup(dec, nonlinearity.builtin("arctan", forcing=0.5), 0.0)
        rng = np.random.default_rng(4)
        x = elliptic.GridFunction.from_values(dec, rng.standard_normal(dec.size))
        y = elliptic.GridFunction.from_values(dec, rng.standard_normal(dec.size))
        combined = poincare.poincare_map(setup, x * 2.0 - y * 3.0)
        separate = poincare.poincare_map(setup, x) * 2.0 - poincare.poincare_map(setup, y) * 3.0
        np.testing.assert_allclose(combined.spectral, separate.spectral, atol=1e-12)


class TestFindFixedPoint(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.dec = _decomposition()
        cls.setup = evolve.EvolutionSetup(cls.dec, nonlinearity.builtin("arctan", forcing=0.5), 1.0)
        cls.orbit = poincare.find_fixed_point(cls.setup, elliptic.GridFunction.zeros(cls.dec))

    def test_certified(self):
        self.assertEqual(self.orbit.status, poincare.CERTIFIED)
        self.assertTrue(self.orbit.certified)
        self.assertLessEqual(self.orbit.residual, poincare.NEWTON_TOL)
        self.assertEqual(self.orbit.mode_cut, self.dec.size)

    def test_index_sign(self):
        self.assertEqual(self.orbit.jacobian_sign, (-1) ** self.dec.d_k)

    def test_closes_up(self):
        moved = poincare.poincare_map(self.setup, self.orbit.fixed_point)
        self.assertLessEqual(elliptic.fractional_norm(self.dec, moved - self.orbit.fixed_point, "alpha"), 1e-7)
        self.assertEqual(len(self.orbit.trajectory.times), poincare.ORBIT_SAMPLES)

    def test_summary(self):
        summary = self.orbit.summary()
        self.assertEqual(summary["status"], poincare.CERTIFIED)
        self.assertGreaterEqual(summary["q_bound"], summary["q_norm"] * (1 - 1e-12))
        self.assertGreater(summary["p_norm"], 0.0)

    def test_apriori_bound(self):
        bound = poincare.apriori_bound(self.setup, self.orbit)
        self.assertTrue(bound["holds"])
        self.assertGreater(bound["slack"], 0.0)
        self.assertEqual(bound["minus_term"], 0.0)
        self.assertAlmostEqual(bound["R"], bound["plus_term"])

    def test_unforced_is_degenerate(self):
        setup = self.setup.with_epsilon(0.0)
        orbit = poincare.find_fixed_point(setup, elliptic.GridFunction.zeros(self.dec))
        self.assertEqual(orbit.status, poincare.DEGENERATE)
        self.assertIsNone(orbit.jacobian_sign)
        self.assertIsNone(orbit.q_bound)

    def test_kernel_forcing_never_certifies(self):
        setup = evolve.EvolutionSetup(self.dec, families.kernel_constant(self.dec), 1.0)
        orbit = poincare.find_fixed_point(setup, elliptic.GridFunction.zeros(self.dec))
        self.assertFalse(orbit.certified)
        self.assertRaises(errors.ConfigurationError, poincare.apriori_bound, setup, orbit)

    def test_sign_stable_under_wider_cut(self):
        narrow = poincare.find_fixed_point(self.setup, self.orbit.fixed_point, 5)
        wide = poincare.find_fixed_point(self.setup, self.orbit.fixed_point, 15)
        self.assertTrue(narrow.certified and wide.certified)
        self.assertEqual(narrow.jacobian_sign, wide.jacobian_sign)
        self.assertEqual(narrow.jacobian_sign, self.orbit.jacobian_sign)

    def test_kernel_seeds_reach_the_same_orbit(self):
        kernel = self.dec.kernel_basis[:, 0]
        for amplitude in (1.0, -1.0, 3.0):
            seed = elliptic.GridFunction.from_values(self.dec, amplitude * kernel)
            orbit = poincare.find_fixed_point(self.setup, seed)
            self.assertEqual(orbit.status, poincare.CERTIFIED, amplitude)
            self.assertEqual(orbit.jacobian_sign, -1)
            distance = elliptic.fractional_norm(self.dec, orbit.fixed_point - self.orbit.fixed_point, "alpha")
            self.assertLess(distance, 1e-6, amplitude)

    def test_singular_away_from_a_fixed_point_is_not_degenerate(self):
        setup = evolve.EvolutionSetup(self.dec, families.kernel_constant(self.dec), 1.0)
        seed = elliptic.GridFunction.from_values(self.dec, 2.0 * self.dec.kernel_basis[:, 0])
        orbit = poincare.find_fixed_point(setup, seed)
        self.assertEqual(orbit.status, poincare.NOT_CONVERGED)
        self.assertLess(elliptic.fractional_norm(self.dec, orbit.fixed_point, "alpha"), poincare.BLOWUP)

    def test_bad_mode_cut(self):
        x0 = elliptic.GridFunction.zeros(self.dec)
        self.assertRaises(errors.ConfigurationError, poincare.find_fixed_point, self.setup, x0, 0)
        self.assertRaises(errors.ConfigurationError, poincare.find_fixed_point, self.setup, x0, self.dec.size + 1)


class TestSweep(unittest.TestCase):

    def setUp(self):
        self.dec = _decomposition()
        self.template = evolve.EvolutionSetup(self.dec, nonlinearity.builtin("arctan", forcing=0.5), 1.0)

    def test_descending(self):
        orbits = poincare.sweep_epsilon(self.template, [0.5, 1.0], elliptic.GridFunction.zeros(self.dec))
        self.assertEqual([orbit.epsilon for orbit in orbits], [1.0, 0.5])
        self.assertTrue(all(orbit.certified for orbit in orbits))

    def test_bad_eps(self):
        x0 = elliptic.GridFunction.zeros(self.dec)
        self.assertRaises(errors.ConfigurationError, poincare.sweep_epsilon, self.template, [], x0)
        self.assertRaises(errors.ConfigurationError, poincare.sweep_epsilon, self.template, [0.0, 0.5], x0)
        self.assertRaises(errors.ConfigurationError, poincare.sweep_epsilon, self.template, [1.5], x0)
