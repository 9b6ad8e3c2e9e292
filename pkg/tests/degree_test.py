import math
import unittest

import numpy as np
from scipy import special

from resonancewrangler import degree, elliptic, errors, evolve, nonlinearity
from resonancewrangler.nonlinearity import families


def _decomposition(n=15, k=1, lengths=math.pi):
    problem = elliptic.EllipticProblem(lengths, n)
    return elliptic.decompose(elliptic.assemble(problem), None, 0.8, problem, k=k)


def _complex_field(func):
    def field(z):
        w = func(z[:, 0] + 1j * z[:, 1])
        return np.column_stack([w.real, w.imag])
    return degree.VectorField(field, 2)


class TestBrouwerDegree(unittest.TestCase):

    def test_plane(self):
        self.assertEqual(degree.brouwer_degree(_complex_field(lambda w: w), 1.0).value, 1)
        self.assertEqual(degree.brouwer_degree(_complex_field(lambda w: -w), 1.0).value, 1)
        self.assertEqual(degree.brouwer_degree(_complex_field(np.conj), 1.0).value, -1)
        self.assertEqual(degree.brouwer_degree(_complex_field(lambda w: w ** 2), 1.0).value, 2)
        self.assertEqual(degree.brouwer_degree(_complex_field(lambda w: w - 3.0), 1.0).value, 0)

    def test_line(self):
        self.assertEqual(degree.brouwer_degree(degree.VectorField(lambda z: z, 1), 2.0).value, 1)
        self.assertEqual(degree.brouwer_degree(degree.VectorField(lambda z: -z, 1), 2.0).value, -1)
        self.assertEqual(degree.brouwer_degree(degree.VectorField(lambda z: z * z + 1.0, 1), 2.0).value, 0)

    def test_record(self):
        result = degree.brouwer_degree(_complex_field(lambda w: w), 2.0, samples=360)
        self.assertEqual(result.method, "winding-2d")
        self.assertEqual(result.samples, 360)
        self.assertAlmostEqual(result.min_boundary, 2.0)

    def test_boundary_zero(self):
        self.assertRaises(errors.DegreeUndefinedError, degree.brouwer_degree,
                          _complex_field(lambda w: w - 1.0), 1.0)
        self.assertRaises(errors.DegreeUndefinedError, degree.brouwer_degree,
                          degree.VectorField(lambda z: z - 2.0, 1), 2.0)

    def test_under_resolved(self):
        self.assertRaises(errors.ResolutionError, degree.brouwer_degree, _complex_field(lambda w: w ** 3), 1.0, 8)

    def test_unsupported_dimension(self):
        self.assertRaises(errors.UnsupportedDimensionError, degree.brouwer_degree,
                          degree.VectorField(lambda z: z, 3), 1.0)

    def test_bad_radius(self):
        self.assertRaises(errors.ConfigurationError, degree.brouwer_degree, degree.VectorField(lambda z: z, 1), 0.0)

    def test_sign_relation(self):
        for field in (degree.VectorField(lambda z: z, 1), _complex_field(lambda w: w), _complex_field(np.conj)):
            self.assertTrue(degree.sign_relation(field, 1.0)["holds"])


class TestKernelRoot(unittest.TestCase):

    def test_line(self):
        root = degree.kernel_root(degree.VectorField(lambda z: z - 0.3, 1), 1.0)
        self.assertAlmostEqual(float(root[0]), 0.3, places=10)
        self.assertIsNone(degree.kernel_root(degree.VectorField(lambda z: z * z + 1.0, 1), 1.0))

    def test_plane(self):
        root = degree.kernel_root(_complex_field(lambda w: w - (0.2 + 0.1j)), 1.0)
        np.testing.assert_allclose(root, [0.2, 0.1], atol=1e-10)
        self.assertIsNone(degree.kernel_root(_complex_field(lambda w: w - 5.0), 1.0))


class TestKernelMap(unittest.TestCase):

    def setUp(self):
        self.dec = _decomposition()

    def test_arctan(self):
        km = degree.KernelMap(self.dec, nonlinearity.builtin("arctan", forcing=0.5))
        self.assertEqual(km.dim, 1)
        self.assertEqual(degree.brouwer_degree(km, 10.0).value, 1)
        root = degree.kernel_root(km, 10.0)
        self.assertLessEqual(abs(float(degree.averaged_map(km, root)[0])), 1e-10)

    def test_neg_arctan(self):
        km = degree.KernelMap(self.dec, nonlinearity.builtin("neg_arctan", forcing=0.5))
        self.assertEqual(degree.brouwer_degree(km, 10.0).value, -1)

    def test_degree_stable_in_radius(self):
        for name, expected in (("arctan", 1), ("neg_arctan", -1)):
            km = degree.KernelMap(self.dec, nonlinearity.builtin(name, forcing=0.5))
            self.assertEqual(degree.brouwer_degree(km, 5.0).value, expected)
            self.assertEqual(degree.brouwer_degree(km, 10.0).value, expected)

    def test_quadrature_converges(self):
        nl = nonlinearity.Nonlinearity("pulsed_arctan", lambda t, x, s, grad: np.exp(np.cos(2 * math.pi * t)) * np.arctan(s),
                                       1.0, math.e * math.pi / 2, math.e)
        reference = special.i0(1.0) * degree.KernelMap(self.dec, nl).instantaneous(0.25, np.array([3.0]))
        self.assertGreater(float(reference[0]), 0.0)
        errors_by_nodes = []
        for nodes in (2, 4, 8, 16):
            value = degree.averaged_map(degree.KernelMap(self.dec, nl, nodes), [3.0])
            errors_by_nodes.append(abs(float(value[0] - reference[0])))
        self.assertTrue(all(b < a for a, b in zip(errors_by_nodes[:2], errors_by_nodes[1:3])), errors_by_nodes)
        self.assertLess(errors_by_nodes[-1], 1e-12 * abs(float(reference[0])))

    def test_kernel_constant(self):
        km = degree.KernelMap(self.dec, families.kernel_constant(self.dec))
        np.testing.assert_allclose(degree.averaged_map(km, [3.0]), [1.0], atol=1e-12)
        self.assertEqual(degree.brouwer_degree(km, 5.0).value, 0)
        self.assertIsNone(degree.kernel_root(km, 5.0))

    def test_coordinates(self):
        km = degree.KernelMap(self.dec, nonlinearity.builtin("arctan"))
        np.testing.assert_allclose(km.coordinates(km.embed([0.7])), [0.7], atol=1e-12)

    def test_square(self):
        dec = _decomposition(n=15, k=2, lengths=(math.pi, math.pi))
        km = degree.KernelMap(dec, nonlinearity.builtin("arctan"), 8)
        self.assertEqual(km.dim, 2)
        self.assertEqual(km.evaluate(np.zeros((3, 2))).shape, (3, 2))

    def test_translation_control(self):
        km = degree.KernelMap(self.dec, nonlinearity.builtin("arctan", forcing=0.5), 16)
        report = degree.translation_degree(km, 10.0, 0.1)
        self.assertTrue(report["holds"])
        self.assertEqual(report["averaged"], -1)

    def test_bad_nodes(self):
        self.assertRaises(errors.ConfigurationError, degree.KernelMap, self.dec, nonlinearity.builtin("arctan"), 0)


class TestLinearDegreeCount(unittest.TestCase):

    def test_matches_lower_dimension(self):
        for k in (1, 2, 3):
            dec = _decomposition(n=31, k=k)
            self.assertEqual(degree.linear_degree_count(dec, 1.0), (-1) ** dec.d[k - 1])

    def test_bad_period(self):
        self.assertRaises(errors.ConfigurationError, degree.linear_degree_count, _decomposition(), 0.0)


class TestRegions(unittest.TestCase):

    def test_cylinder(self):
        dec = _decomposition()
        x = elliptic.GridFunction.from_values(dec, 2.0 * dec.kernel_basis[:, 0])
        self.assertTrue(degree.Cylinder(3.0, 1.0).contains(dec, x))
        self.assertFalse(degree.Cylinder(1.0, 1.0).contains(dec, x))
        self.assertTrue(degree.Cylinder(2.02, 1.0).near_boundary(dec, x))
        self.assertFalse(degree.Ball(100.0).near_boundary(dec, x))


class TestLeraySchauderDegree(unittest.TestCase):

    def setUp(self):
        self.dec = _decomposition()
        self.setup = evolve.EvolutionSetup(self.dec, nonlinearity.builtin("arctan", forcing=0.5), 1.0)

    def test_single_orbit(self):
        seeds = [elliptic.GridFunction.zeros(self.dec), elliptic.GridFunction.zeros(self.dec)]
        result = degree.ls_degree_regular(self.setup, 1e3, seeds)
        self.assertEqual(result.count, 1)
        self.assertEqual(result.value, -1)
        self.assertFalse(result.ambiguous)

    def test_degenerate(self):
        result = degree.ls_degree_regular(self.setup.with_epsilon(0.0), 1e3, [elliptic.GridFunction.zeros(self.dec)])
        self.assertIsNone(result.value)
        self.assertEqual(result.status, "cannot_certify")

    def test_averaging(self):
        report = degree.averaging_experiment(self.setup, [0.2, 0.1], 10.0, 10.0, quadrature_nodes=16)
        self.assertEqual(report["g_degree"], 1)
        self.assertEqual(report["expected_degree"], -1)
        self.assertEqual([row["eps"] for row in report["rows"]], [0.2, 0.1])
        for row in report["rows"]:
            self.assertTrue(row["fixed_point_found"])
            self.assertEqual(row["degree_value"], -1)
        self.assertTrue(report["q_decreasing"])
