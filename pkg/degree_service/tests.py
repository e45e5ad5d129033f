import jsonschema
import numpy as np
from django.test import SimpleTestCase
from hypothesis import given
from hypothesis import strategies as st

from config.exceptions import DomainError
from config.testing import distributions, graphs, probability_vectors
from degree_service.models import (
    DegreeVector,
    Direction,
    JointDegreeDistribution,
)
from degree_service.serializers import (
    DISTRIBUTION_SCHEMA,
    DistributionSerializer,
)
from degree_service.utils import (
    empirical_distribution,
    marginal,
    out_stats,
    stats,
    thin,
    validate_probabilities,
)
from graph_service.models import TypedDigraph


def vector(in_by_class, out_by_class):
    return DegreeVector(in_by_class, out_by_class)


def point_mass(in_by_class, out_by_class):
    return JointDegreeDistribution(
        len(in_by_class), {vector(in_by_class, out_by_class): 1.0}
    )


def assert_tables_close(test, left, right, tolerance=1e-12):
    test.assertEqual(left.n_classes, right.n_classes)
    for key in set(left.table) | set(right.table):
        test.assertAlmostEqual(
            left.table.get(key, 0.0), right.table.get(key, 0.0),
            delta=tolerance, msg=str(key),
        )


@st.composite
def thinning_cases(draw):
    dist = draw(distributions())
    p = draw(probability_vectors(dist.n_classes))
    q = draw(probability_vectors(dist.n_classes))
    return dist, p, q


class JointDegreeDistributionTests(SimpleTestCase):
    def test_must_be_normalized(self):
        with self.assertRaises(DomainError):
            JointDegreeDistribution(1, {vector([1], [1]): 0.9})

    def test_class_count_is_bounded(self):
        with self.assertRaises(DomainError):
            point_mass([0] * 9, [0] * 9)

    def test_vectors_must_match_the_class_count(self):
        with self.assertRaises(DomainError):
            JointDegreeDistribution(2, {vector([1], [1]): 1.0})

    def test_negative_degrees_are_rejected(self):
        with self.assertRaises(DomainError):
            vector([-1], [0])

    def test_swapped_exchanges_directions(self):
        dist = point_mass([1, 0], [2, 3])
        self.assertEqual(dist.swapped(), point_mass([2, 3], [1, 0]))


class EmpiricalDistributionTests(SimpleTestCase):
    def test_cycle(self):
        g = TypedDigraph.from_edges(3, [(0, 1, 0), (1, 2, 0), (2, 0, 0)], 1)
        self.assertEqual(empirical_distribution(g), point_mass([1], [1]))

    def test_parallel_edges_of_two_classes(self):
        g = TypedDigraph.from_edges(2, [(0, 1, 0), (0, 1, 1)], 2)
        self.assertEqual(
            empirical_distribution(g),
            JointDegreeDistribution(
                2,
                {
                    vector([0, 0], [1, 1]): 0.5,
                    vector([1, 1], [0, 0]): 0.5,
                },
            ),
        )

    def test_bow_tie_counts(self):
        g = TypedDigraph.from_edges(
            4, [(0, 1, 0), (1, 2, 0), (2, 1, 0), (2, 3, 0)], 1
        )
        self.assertEqual(
            dict(empirical_distribution(g).table),
            {
                vector([0], [1]): 0.25,
                vector([2], [1]): 0.25,
                vector([1], [2]): 0.25,
                vector([1], [0]): 0.25,
            },
        )

    def test_graph_without_nodes(self):
        with self.assertRaises(DomainError):
            empirical_distribution(TypedDigraph.from_edges(0, [], 1))

    @given(graphs(max_classes=3))
    def test_mean_degrees_count_edges(self, g):
        dist = empirical_distribution(g)
        z = stats(dist).z_by_class
        for edge_class in range(g.n_classes):
            edges = int(np.count_nonzero(g.cls == edge_class))
            self.assertAlmostEqual(
                z[edge_class], edges / g.node_count, delta=1e-12
            )
        np.testing.assert_allclose(
            out_stats(dist).z_by_class, z, rtol=0, atol=1e-9
        )


class ThinTests(SimpleTestCase):
    def test_binomial_in_degree(self):
        thinned = thin(point_mass([2], [0]), [0.5])
        np.testing.assert_allclose(
            marginal(thinned, Direction.IN, 0), [0.25, 0.5, 0.25], atol=1e-15
        )

    @given(distributions())
    def test_full_occupation_is_the_identity(self, dist):
        assert_tables_close(self, thin(dist, [1.0] * dist.n_classes), dist)

    @given(distributions())
    def test_no_occupation_is_a_point_mass(self, dist):
        n = dist.n_classes
        assert_tables_close(
            self, thin(dist, [0.0] * n), point_mass([0] * n, [0] * n)
        )

    @given(thinning_cases())
    def test_thinning_composes(self, case):
        dist, p, q = case
        assert_tables_close(
            self,
            thin(thin(dist, p), q),
            thin(dist, np.multiply(p, q)),
        )

    @given(thinning_cases())
    def test_normalization_and_mean_degrees(self, case):
        dist, p, _ = case
        thinned = thin(dist, p)
        self.assertAlmostEqual(sum(thinned.table.values()), 1.0, delta=1e-12)
        np.testing.assert_allclose(
            stats(thinned).z_by_class,
            np.multiply(stats(dist).z_by_class, p),
            rtol=0,
            atol=1e-12,
        )

    @given(thinning_cases())
    def test_support_shrinks(self, case):
        dist, p, _ = case
        in_max = dist.in_degrees.max(axis=0)
        out_max = dist.out_degrees.max(axis=0)
        thinned = thin(dist, p)
        self.assertTrue(np.all(thinned.in_degrees <= in_max))
        self.assertTrue(np.all(thinned.out_degrees <= out_max))

    def test_probabilities_outside_the_unit_interval(self):
        for p in ([1.5], [-0.1], [0.5, 0.5]):
            with self.subTest(p=p), self.assertRaises(DomainError):
                thin(point_mass([1], [1]), p)


class StatsTests(SimpleTestCase):
    def test_constant_degree(self):
        self.assertEqual(stats(point_mass([2], [2])).z_by_class, (2.0,))

    def test_marginal(self):
        dist = JointDegreeDistribution(
            2,
            {
                vector([0, 3], [1, 0]): 0.25,
                vector([2, 1], [0, 0]): 0.75,
            },
        )
        np.testing.assert_allclose(
            marginal(dist, Direction.IN, 1), [0.0, 0.75, 0.0, 0.25]
        )
        np.testing.assert_allclose(
            marginal(dist, Direction.OUT, 0), [0.75, 0.25]
        )

    def test_validate_probabilities(self):
        np.testing.assert_array_equal(
            validate_probabilities((0.0, 1.0), 2), [0.0, 1.0]
        )
        with self.assertRaises(DomainError):
            validate_probabilities([0.5], 2)


class DistributionSerializerTests(SimpleTestCase):
    def payload(self, *entries, classes=1):
        return {
            "classes": classes,
            "entries": [
                {"in": in_by_class, "out": out_by_class, "p": p}
                for in_by_class, out_by_class, p in entries
            ],
        }

    def test_loads_a_distribution(self):
        serializer = DistributionSerializer(
            data=self.payload(([1], [2], 0.5), ([1], [0], 0.5))
        )
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(
            serializer.to_distribution(),
            JointDegreeDistribution(
                1, {vector([1], [2]): 0.5, vector([1], [0]): 0.5}
            ),
        )

    def test_rounded_input_is_renormalized(self):
        serializer = DistributionSerializer(
            data=self.payload(([1], [1], 0.6), ([0], [0], 0.4 + 5e-10))
        )
        self.assertTrue(serializer.is_valid(), serializer.errors)
        with self.assertLogs("degree_service.serializers", "WARNING"):
            dist = serializer.to_distribution()
        self.assertAlmostEqual(sum(dist.table.values()), 1.0, delta=1e-15)

    def test_unbalanced_table_is_flagged(self):
        serializer = DistributionSerializer(
            data=self.payload(([1], [3], 0.5), ([1], [0], 0.5))
        )
        self.assertTrue(serializer.is_valid(), serializer.errors)
        logger_name = "degree_service.serializers"
        with self.assertLogs(logger_name, "WARNING") as logs:
            serializer.to_distribution()
        self.assertIn("no graph has this degree table", logs.output[0])

    def test_balanced_table_loads_quietly(self):
        serializer = DistributionSerializer(
            data=self.payload(([1], [2], 0.5), ([1], [0], 0.5))
        )
        self.assertTrue(serializer.is_valid(), serializer.errors)
        with self.assertNoLogs("degree_service.serializers", "WARNING"):
            serializer.to_distribution()

    def test_unnormalized_input_is_invalid(self):
        serializer = DistributionSerializer(
            data=self.payload(([1], [1], 0.6), ([0], [0], 0.3))
        )
        self.assertFalse(serializer.is_valid())

    def test_vectors_must_match_classes(self):
        serializer = DistributionSerializer(
            data=self.payload(([1], [1, 0], 1.0), classes=2)
        )
        self.assertFalse(serializer.is_valid())

    def test_negative_degree_is_invalid(self):
        serializer = DistributionSerializer(
            data=self.payload(([-1], [1], 1.0))
        )
        self.assertFalse(serializer.is_valid())

    @given(distributions())
    def test_representation_follows_the_schema(self, dist):
        data = DistributionSerializer(dist).data
        jsonschema.validate(data, DISTRIBUTION_SCHEMA)
        serializer = DistributionSerializer(data=data)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        assert_tables_close(self, serializer.to_distribution(), dist)
