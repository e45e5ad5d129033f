import jsonschema
import numpy as np
from django.test import SimpleTestCase
from scipy.linalg import lu_factor

from config.exceptions import DegenerateClassError, DomainError, NumericError
from degree_service.models import DegreeVector, JointDegreeDistribution
from degree_service.utils import empirical_distribution
from genfunc_service.utils import from_distribution, from_poisson, occupy
from graph_service.utils import reachable_nodes
from outbreak_service.models import OutbreakSystem
from outbreak_service.serializers import (
    OUTBREAK_REPORT_SCHEMA,
    OutbreakReportSerializer,
)
from outbreak_service.utils import (
    analyze_outbreak,
    build_system,
    criticality,
    excess_functions,
    expected_sizes,
    solve,
)
from simulation_service.utils import generate_er, occupy_sample, trial_rng


def poisson_system(lam, p):
    return build_system(excess_functions(from_poisson(lam)), p)


def two_layer_table():
    # two decoupled classes, each supercritical on its own
    return JointDegreeDistribution(
        2,
        {
            DegreeVector([1, 0], [3, 0]): 0.25,
            DegreeVector([3, 0], [1, 0]): 0.25,
            DegreeVector([0, 1], [0, 3]): 0.25,
            DegreeVector([0, 3], [0, 1]): 0.25,
        },
    )


class BuildSystemTests(SimpleTestCase):
    def test_single_poisson_class(self):
        system = poisson_system([2.0], [0.25])
        np.testing.assert_allclose(system.a, [[0.5]])
        self.assertAlmostEqual(system.det_a, 0.5)
        np.testing.assert_array_equal(system.b, [1.0])

    def test_two_poisson_classes(self):
        lam, p = np.array([1.2, 0.7]), np.array([0.3, 0.9])
        system = poisson_system(lam, p)
        np.testing.assert_allclose(
            system.a, np.eye(2) - np.outer([1.0, 1.0], lam * p)
        )
        self.assertAlmostEqual(system.det_a, 1.0 - lam @ p, delta=1e-14)

    def test_no_occupation(self):
        system = poisson_system([2.0, 3.0, 0.5], [0.0, 0.0, 0.0])
        np.testing.assert_array_equal(system.a, np.eye(3))
        self.assertEqual(system.det_a, 1.0)

    def test_determinant_sign_survives_pivoting(self):
        # an off-diagonal heavy table forces a row swap in the elimination
        dist = JointDegreeDistribution(
            2,
            {
                DegreeVector([1, 0], [0, 3]): 0.5,
                DegreeVector([0, 1], [3, 0]): 0.5,
            },
        )
        system = build_system(
            excess_functions(from_distribution(dist)), [1.0, 1.0]
        )
        np.testing.assert_allclose(system.a, [[1.0, -3.0], [-3.0, 1.0]])
        self.assertAlmostEqual(system.det_a, np.linalg.det(system.a))

    def test_class_without_edges(self):
        dist = JointDegreeDistribution(
            2, {DegreeVector([1, 0], [1, 0]): 1.0}
        )
        with self.assertRaises(DegenerateClassError) as caught:
            excess_functions(from_distribution(dist))
        self.assertIn("drop the class", str(caught.exception))

    def test_probability_count_must_match(self):
        with self.assertRaises(DomainError):
            poisson_system([1.0, 1.0], [0.5])


class CriticalityTests(SimpleTestCase):
    def test_subcritical(self):
        system = poisson_system([0.8, 0.6], [0.5, 0.5])
        self.assertAlmostEqual(system.det_a, 0.3)
        self.assertTrue(criticality(system))

    def test_supercritical(self):
        system = poisson_system([2.0, 2.0], [0.5, 0.5])
        self.assertAlmostEqual(system.det_a, -1.0)
        self.assertFalse(criticality(system))

    def test_threshold_counts_as_supercritical(self):
        self.assertFalse(criticality(poisson_system([2.0], [0.5])))

    def test_two_supercritical_layers_with_a_positive_determinant(self):
        system = build_system(
            excess_functions(from_distribution(two_layer_table())),
            [1.0, 1.0],
        )
        np.testing.assert_allclose(system.a, np.diag([-0.5, -0.5]))
        self.assertAlmostEqual(system.det_a, 0.25)
        self.assertAlmostEqual(system.spectral_radius, 1.5)
        self.assertFalse(criticality(system))

    def test_spectral_radius_of_a_poisson_system(self):
        system = poisson_system([0.8, 0.6], [0.5, 0.5])
        self.assertAlmostEqual(system.spectral_radius, 0.7, delta=1e-12)


class ExpectedSizesTests(SimpleTestCase):
    def test_single_poisson_class(self):
        report, _ = analyze_outbreak(from_poisson([2.0]), [0.25])
        self.assertFalse(report.supercritical)
        self.assertAlmostEqual(report.e_s_by_class[0], 2.0, delta=1e-12)
        self.assertAlmostEqual(report.e_s_node, 2.0, delta=1e-12)

    def test_two_poisson_classes(self):
        report, _ = analyze_outbreak(from_poisson([0.8, 0.6]), [0.5, 0.5])
        np.testing.assert_allclose(report.e_s_by_class, [10 / 3, 10 / 3])
        self.assertAlmostEqual(report.e_s_node, 10 / 3, delta=1e-12)

    def test_only_the_seed_fails_without_occupation(self):
        report, _ = analyze_outbreak(from_poisson([1.5, 2.5]), [0.0, 0.0])
        self.assertEqual(report.e_s_node, 1.0)

    def test_erdos_renyi_closed_form(self):
        rng = np.random.default_rng(20240)
        for _ in range(50):
            n = int(rng.integers(1, 5))
            lam = rng.uniform(0.1, 3.0, size=n)
            p = rng.uniform(0.0, 1.0, size=n)
            s = lam @ p
            if s >= 0.95:
                p *= 0.9 / s
                s = lam @ p
            report, _ = analyze_outbreak(from_poisson(lam), p)
            expected = 1.0 / (1.0 - s)
            np.testing.assert_allclose(
                report.e_s_by_class, [expected] * n, rtol=0, atol=1e-10
            )
            self.assertAlmostEqual(report.e_s_node, expected, delta=1e-10)

    def test_decoupled_supercritical_layers_have_no_finite_mean(self):
        report, _ = analyze_outbreak(
            from_distribution(two_layer_table()), [1.0, 1.0]
        )
        self.assertAlmostEqual(report.det_a, 0.25)
        self.assertTrue(report.supercritical)
        self.assertIsNone(report.e_s_by_class)
        self.assertIsNone(report.e_s_node)

    def test_supercritical_report_has_no_sizes(self):
        report, _ = analyze_outbreak(from_poisson([2.0, 2.0]), [0.5, 0.5])
        self.assertTrue(report.supercritical)
        self.assertIsNone(report.e_s_by_class)
        self.assertIsNone(report.e_s_node)

    def test_solution_scales_with_the_right_hand_side(self):
        system = poisson_system([0.8, 0.6], [0.5, 0.5])
        base = solve(system, system.b)
        np.testing.assert_allclose(solve(system, 3.5 * system.b), 3.5 * base)
        np.testing.assert_allclose(base, 1.0 / system.det_a)

    def test_right_hand_side_shape(self):
        system = poisson_system([0.8], [0.5])
        with self.assertRaises(DomainError):
            solve(system, [1.0, 1.0])

    def test_ill_conditioned_system(self):
        # subcritical, but the coupling term swamps the diagonal
        a = np.array([[0.5, -1e13], [0.0, 0.5]])
        lu, pivots = lu_factor(a)
        system = OutbreakSystem(
            a=a, b=np.ones(2), det_a=0.25, lu=lu, pivots=pivots
        )
        with self.assertRaises(NumericError) as caught:
            occupied = occupy(from_poisson([1.0, 1.0]), [0.1, 0.1])
            expected_sizes(system, occupied, [0.1, 0.1])
        self.assertGreater(caught.exception.condition, 1e12)

    def test_table_kernel_against_outbreaks_on_a_sample(self):
        # a sparse random graph is locally tree-like, so its own degree
        # table predicts the outbreaks seen on it
        n_nodes, p = 20000, [0.4, 0.4]
        graph = generate_er(n_nodes, [1.0, 0.8], trial_rng(11, 0, 0))
        report, _ = analyze_outbreak(
            from_distribution(empirical_distribution(graph)), p
        )

        means = []
        for trial in range(20):
            occupied = occupy_sample(graph, p, trial_rng(11, trial, 1))
            seeds = trial_rng(11, trial, 2).integers(0, n_nodes, size=500)
            means.append(
                np.mean([len(reachable_nodes(occupied, s)) for s in seeds])
            )
        standard_error = np.std(means, ddof=1) / np.sqrt(len(means))
        self.assertLess(
            abs(np.mean(means) - report.e_s_node),
            3 * standard_error,
        )


class OutbreakReportSerializerTests(SimpleTestCase):
    def test_subcritical_report(self):
        report, _ = analyze_outbreak(from_poisson([0.8, 0.6]), [0.5, 0.5])
        data = OutbreakReportSerializer(report).data
        jsonschema.validate(data, OUTBREAK_REPORT_SCHEMA)
        self.assertEqual(data["supercritical"], False)
        self.assertEqual(len(data["e_s_by_class"]), 2)

    def test_supercritical_report(self):
        report, _ = analyze_outbreak(from_poisson([3.0]), [1.0])
        data = OutbreakReportSerializer(report).data
        jsonschema.validate(data, OUTBREAK_REPORT_SCHEMA)
        self.assertIsNone(data["e_s_node"])
        self.assertIsNone(data["e_s_by_class"])
