import itertools
import math

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from config.exceptions import DegenerateClassError, DomainError
from config.testing import distributions, probability_vectors
from degree_service.models import (
    DegreeVector,
    Direction,
    JointDegreeDistribution,
)
from degree_service.utils import (
    empirical_distribution,
    marginal,
    out_stats,
    stats,
    thin,
)
from genfunc_service.models import EvalPoint, PoissonKernel
from genfunc_service.utils import (
    dual,
    evaluate,
    excess,
    from_distribution,
    from_poisson,
    is_symmetric,
    occupy,
    partial,
    power_coefficients,
)
from graph_service.models import TypedDigraph

STEP = 1e-6


def single(in_by_class, out_by_class):
    return from_distribution(
        JointDegreeDistribution(
            len(in_by_class), {DegreeVector(in_by_class, out_by_class): 1.0}
        )
    )


def points(n_classes, low=0.0, high=1.0):
    coordinates = st.lists(
        st.floats(low, high), min_size=n_classes, max_size=n_classes
    )
    return st.builds(EvalPoint, coordinates, coordinates)


@st.composite
def table_and_point(draw, low=0.0, high=1.0):
    dist = draw(distributions())
    return dist, draw(points(dist.n_classes, low, high))


@st.composite
def table_point_and_p(draw):
    dist, pt = draw(table_and_point())
    return dist, pt, draw(probability_vectors(dist.n_classes))


def moved(pt, direction, edge_class, delta):
    x, y = list(pt.x), list(pt.y)
    coordinates = x if direction == Direction.IN else y
    coordinates[edge_class] += delta
    return EvalPoint(x, y)


class EvaluateTests(SimpleTestCase):
    def test_all_ones_point(self):
        self.assertEqual(evaluate(single([1], [1]), EvalPoint.ones(1)), 1.0)

    def test_single_atom(self):
        self.assertAlmostEqual(
            evaluate(single([1], [1]), EvalPoint([0.5], [0.5])), 0.25
        )

    def test_poisson_closed_form(self):
        self.assertAlmostEqual(
            evaluate(from_poisson([2.0]), EvalPoint([1.0], [0.0])),
            math.exp(-2.0),
            delta=1e-15,
        )

    def test_points_outside_the_unit_cube(self):
        with self.assertRaises(DomainError):
            EvalPoint([1.5], [0.0])
        with self.assertRaises(DomainError):
            EvalPoint([0.5], [-0.1])

    def test_class_count_mismatch(self):
        with self.assertRaises(DomainError):
            evaluate(from_poisson([1.0, 1.0]), EvalPoint.ones(1))

    @given(distributions())
    def test_normalization(self, dist):
        f = from_distribution(dist)
        ones = EvalPoint.ones(dist.n_classes)
        self.assertAlmostEqual(evaluate(f, ones), 1.0, delta=1e-12)
        for edge_class in range(dist.n_classes):
            if stats(dist).z_by_class[edge_class] > 0:
                h = excess(f, edge_class)
                self.assertAlmostEqual(evaluate(h, ones), 1.0, delta=1e-12)

    @given(distributions())
    def test_nondecreasing_in_every_coordinate(self, dist):
        f = from_distribution(dist)
        n = dist.n_classes
        grid = np.linspace(0.0, 1.0, 5)
        for direction, edge_class in itertools.product(Direction, range(n)):
            base = EvalPoint([0.5] * n, [0.5] * n)
            values = [
                evaluate(f, moved(base, direction, edge_class, t - 0.5))
                for t in grid
            ]
            self.assertTrue(np.all(np.diff(values) >= -1e-15))


class PartialTests(SimpleTestCase):
    def test_mean_degrees_of_a_graph(self):
        g = TypedDigraph.from_edges(
            4, [(0, 1, 0), (1, 2, 1), (2, 1, 0), (2, 3, 1), (3, 3, 1)], 2
        )
        dist = empirical_distribution(g)
        f = from_distribution(dist)
        ones = EvalPoint.ones(2)
        for edge_class, z in enumerate(stats(dist).z_by_class):
            for direction in Direction:
                self.assertAlmostEqual(
                    partial(f, direction, edge_class, ones), z, delta=1e-12
                )

    def test_poisson(self):
        self.assertAlmostEqual(
            partial(from_poisson([2.0]), Direction.OUT, 0, EvalPoint.ones(1)),
            2.0,
        )

    @given(distributions(), st.data())
    def test_occupied_mean_degrees(self, dist, data):
        p = data.draw(probability_vectors(dist.n_classes))
        occupied = occupy(from_distribution(dist), p)
        ones = EvalPoint.ones(dist.n_classes)
        z_in, z_out = stats(dist).z_by_class, out_stats(dist).z_by_class
        for edge_class in range(dist.n_classes):
            self.assertAlmostEqual(
                partial(occupied, Direction.IN, edge_class, ones),
                z_in[edge_class] * p[edge_class],
                delta=1e-12,
            )
            self.assertAlmostEqual(
                partial(occupied, Direction.OUT, edge_class, ones),
                z_out[edge_class] * p[edge_class],
                delta=1e-12,
            )

    @given(table_and_point(low=0.1, high=0.9), st.data())
    def test_matches_central_differences(self, case, data):
        dist, pt = case
        f = from_distribution(dist)
        p = data.draw(probability_vectors(dist.n_classes))
        for g in (f, occupy(f, p), dual(f)):
            for direction in Direction:
                for edge_class in range(dist.n_classes):
                    exact = partial(g, direction, edge_class, pt)
                    numeric = (
                        evaluate(g, moved(pt, direction, edge_class, STEP))
                        - evaluate(g, moved(pt, direction, edge_class, -STEP))
                    ) / (2 * STEP)
                    self.assertLessEqual(
                        abs(numeric - exact), 1e-5 * max(1.0, abs(exact))
                    )

    def test_class_out_of_range(self):
        with self.assertRaises(DomainError):
            partial(from_poisson([1.0]), Direction.IN, 1, EvalPoint.ones(1))


class ExcessTests(SimpleTestCase):
    def test_poisson_excess_is_the_function_itself(self):
        f = from_poisson([1.3, 0.4])
        for edge_class in range(2):
            h = excess(f, edge_class)
            for pt in (EvalPoint([0.2, 0.7], [0.9, 0.1]), EvalPoint.ones(2)):
                self.assertAlmostEqual(
                    evaluate(h, pt), evaluate(f, pt), delta=1e-15
                )

    def test_single_atom(self):
        h = excess(single([1], [2]), 0)
        for t in (0.0, 0.3, 1.0):
            self.assertEqual(evaluate(h, EvalPoint([t], [1.0])), 1.0)
        for u in (0.0, 0.3, 1.0):
            self.assertAlmostEqual(
                evaluate(h, EvalPoint([0.5], [u])), u**2, delta=1e-15
            )

    def test_in_degree_bias(self):
        dist = JointDegreeDistribution(
            1,
            {
                DegreeVector([1], [0]): 0.5,
                DegreeVector([3], [2]): 0.5,
            },
        )
        h = excess(from_distribution(dist), 0)
        # arrivals land on the in-degree-3 node three times as often
        self.assertAlmostEqual(
            partial(h, Direction.OUT, 0, EvalPoint.ones(1)), 0.75 * 2
        )

    def test_class_without_edges(self):
        with self.assertRaises(DegenerateClassError) as caught:
            excess(single([1, 0], [1, 0]), 1)
        self.assertEqual(caught.exception.edge_class, 1)
        with self.assertRaises(DegenerateClassError):
            excess(from_poisson([1.0, 0.0]), 1)

    def test_excess_after_removing_every_edge(self):
        with self.assertRaises(DegenerateClassError):
            excess(occupy(single([1], [1]), [0.0]), 0)


class OccupyTests(SimpleTestCase):
    def test_full_occupation_changes_nothing(self):
        f = single([2, 1], [0, 3])
        self.assertEqual(occupy(f, [1.0, 1.0]), f)

    def test_binomial_zero_mass(self):
        g = occupy(single([2], [0]), [0.5])
        self.assertAlmostEqual(evaluate(g, EvalPoint([0.0], [1.0])), 0.25)

    def test_composes_with_itself(self):
        f = from_poisson([1.5, 0.5])
        pt = EvalPoint([0.3, 0.6], [0.2, 0.9])
        self.assertAlmostEqual(
            evaluate(occupy(occupy(f, [0.5, 0.4]), [0.5, 0.5]), pt),
            evaluate(occupy(f, [0.25, 0.2]), pt),
            delta=1e-15,
        )

    def test_invalid_probabilities(self):
        with self.assertRaises(DomainError):
            occupy(from_poisson([1.0]), [1.1])

    @settings(max_examples=100)
    @given(table_point_and_p())
    def test_occupation_equals_thinning(self, case):
        dist, pt, p = case
        self.assertAlmostEqual(
            evaluate(occupy(from_distribution(dist), p), pt),
            evaluate(from_distribution(thin(dist, p)), pt),
            delta=1e-12,
        )
        ones = EvalPoint.ones(dist.n_classes)
        self.assertAlmostEqual(
            evaluate(occupy(from_distribution(dist), p), ones),
            1.0,
            delta=1e-12,
        )


class DualTests(SimpleTestCase):
    def test_symmetric_poisson(self):
        f = from_poisson([0.7, 1.1])
        grid = np.linspace(0.0, 1.0, 4)
        for x0, y0 in itertools.product(grid, grid):
            pt = EvalPoint([x0, 1.0 - x0], [y0, y0 / 2])
            self.assertAlmostEqual(
                evaluate(dual(f), pt), evaluate(f, pt), delta=1e-15
            )
        self.assertTrue(is_symmetric(f))

    def test_single_atom(self):
        f = single([1], [2])
        for u, t in itertools.product((0.0, 0.4, 1.0), repeat=2):
            self.assertAlmostEqual(
                evaluate(dual(f), EvalPoint([u], [t])),
                evaluate(f, EvalPoint([t], [u])),
                delta=1e-15,
            )
        self.assertFalse(is_symmetric(f))

    def test_occupied_poisson_stays_symmetric(self):
        f = occupy(from_poisson([2.0]), [0.3])
        self.assertTrue(is_symmetric(f))

    @given(table_and_point())
    def test_dual_twice_is_the_identity(self, case):
        dist, pt = case
        f = occupy(from_distribution(dist), [0.5] * dist.n_classes)
        self.assertAlmostEqual(
            evaluate(dual(dual(f)), pt), evaluate(f, pt), delta=1e-15
        )


class PoissonKernelTests(SimpleTestCase):
    def test_from_network_size(self):
        kernel = PoissonKernel.from_network_size(1000, [0.0008, 0.0006])
        np.testing.assert_allclose(kernel.lam, [0.8, 0.6])

    def test_rejects_negative_means(self):
        with self.assertRaises(DomainError):
            PoissonKernel((-1.0,))
        with self.assertRaises(DomainError):
            PoissonKernel.from_network_size(0, [0.1])


class PowerCoefficientTests(SimpleTestCase):
    @given(distributions(), st.integers(2, 3), st.data())
    def test_powers_count_total_degree(self, dist, m, data):
        edge_class = data.draw(st.integers(0, dist.n_classes - 1))
        pmf = marginal(dist, Direction.OUT, edge_class)
        brute_force = np.zeros(m * (len(pmf) - 1) + 1)
        for degrees in itertools.product(range(len(pmf)), repeat=m):
            brute_force[sum(degrees)] += np.prod(pmf[list(degrees)])

        coefficients = power_coefficients(dist, edge_class, m)
        np.testing.assert_allclose(
            coefficients[: len(brute_force)], brute_force, atol=1e-14
        )
        self.assertAlmostEqual(coefficients.sum(), 1.0, delta=1e-12)

    def test_negative_power(self):
        with self.assertRaises(DomainError):
            power_coefficients(single([1], [1]).kernel.distribution, 0, -1)
