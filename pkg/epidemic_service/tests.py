import io
import json
import math
from pathlib import Path

import jsonschema
import numpy as np
from django.core.management import CommandError, call_command
from django.test import SimpleTestCase
from hypothesis import given
from hypothesis import strategies as st

from config.exceptions import DomainError
from config.testing import TemporaryDirectoryMixin, edge_list_file
from degree_service.models import (
    DegreeStats,
    DegreeVector,
    Direction,
    JointDegreeDistribution,
)
from degree_service.serializers import DistributionSerializer
from degree_service.utils import empirical_distribution
from epidemic_service.models import ERParams
from epidemic_service.serializers import (
    ANALYSIS_SCHEMA,
    EPIDEMIC_REPORT_SCHEMA,
    SWEEP_SCHEMA,
    EpidemicReportSerializer,
)
from epidemic_service.utils import (
    analyze,
    edge_failure_epidemic,
    epidemic_report,
    er_closed_form,
    er_params_from_network_size,
    lambert_w0,
    solve_dual_fixed_point,
    solve_forward_fixed_point,
)
from genfunc_service.models import EvalPoint
from genfunc_service.utils import (
    from_distribution,
    from_poisson,
    occupy,
    partial,
)
from graph_service.models import TypedDigraph
from graph_service.utils import decompose
from simulation_service.utils import generate_er, occupy_sample, trial_rng

ER_CURVE = [
    (1.0, 0.0),
    (1.05, 0.0937018),
    (1.1, 0.176134),
    (1.15, 0.249002),
    (1.2, 0.313698),
    (1.25, 0.37137),
    (1.3, 0.42297),
    (1.35, 0.469294),
    (1.4, 0.511011),
    (1.45, 0.54869),
    (1.5, 0.582812),
    (1.55, 0.61379),
    (1.6, 0.641981),
    (1.65, 0.667691),
    (1.7, 0.691186),
    (1.75, 0.712698),
    (1.8, 0.73243),
    (1.85, 0.75056),
    (1.9, 0.767244),
    (1.95, 0.78262),
    (2.0, 0.796812),
]
BRANCH_POINT = -1.0 / math.e


def occupied_poisson(lam, p):
    g = occupy(from_poisson(lam), p)
    z = DegreeStats(np.multiply(lam, p))
    return g, z


def asymmetric_table():
    # every node has in-degree 2; out-degrees 0, 2 or 4
    return JointDegreeDistribution(
        1,
        {
            DegreeVector([2], [0]): 0.3,
            DegreeVector([2], [4]): 0.3,
            DegreeVector([2], [2]): 0.4,
        },
    )


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


def skewed_out_degree_graph(n_nodes, rng):
    # out-degrees 0, 2 or 4 with uniform targets, so in-degrees are Poisson
    out_degrees = rng.choice([0, 2, 4], p=[0.3, 0.4, 0.3], size=n_nodes)
    count = int(out_degrees.sum())
    return TypedDigraph(
        node_count=n_nodes,
        n_classes=1,
        src=np.repeat(np.arange(n_nodes), out_degrees),
        dst=rng.integers(0, n_nodes, size=count),
        cls=np.zeros(count, dtype=np.int64),
    )


class FixedPointTests(SimpleTestCase):
    def test_subcritical_solution_is_trivial(self):
        g, z = occupied_poisson([1.0, 0.4], [0.5, 0.5])
        result = solve_dual_fixed_point(g, z)
        self.assertTrue(result.converged)
        np.testing.assert_allclose(result.h, [1.0, 1.0], atol=1e-10)

    def test_known_values(self):
        for s, h in ((1.5, 0.417188), (2.0, 0.203188)):
            g, z = occupied_poisson([s], [1.0])
            for solver in (solve_dual_fixed_point, solve_forward_fixed_point):
                with self.subTest(s=s, solver=solver.__name__):
                    result = solver(g, z)
                    self.assertTrue(result.converged)
                    self.assertAlmostEqual(result.h[0], h, delta=5e-7)

    def test_forward_and_dual_agree_on_symmetric_input(self):
        g, z = occupied_poisson([1.2, 0.9], [0.8, 0.7])
        forward = solve_forward_fixed_point(g, z)
        dual = solve_dual_fixed_point(g, z)
        np.testing.assert_allclose(forward.h, dual.h, atol=1e-11)

    def test_solution_reproduces_itself(self):
        dist = asymmetric_table()
        g = occupy(from_distribution(dist), [0.9])
        z = DegreeStats([partial(g, Direction.IN, 0, EvalPoint.ones(1))])
        ones = [1.0]
        dual = solve_dual_fixed_point(g, z)
        forward = solve_forward_fixed_point(g, z)
        self.assertLess(dual.h[0], 1.0)
        self.assertLess(forward.h[0], 1.0)
        self.assertAlmostEqual(
            partial(g, Direction.OUT, 0, EvalPoint(dual.h, ones)) / 1.8,
            dual.h[0],
            delta=1e-10,
        )
        self.assertAlmostEqual(
            partial(g, Direction.IN, 0, EvalPoint(ones, forward.h)) / 1.8,
            forward.h[0],
            delta=1e-10,
        )

    def test_unoccupied_class_is_pinned_to_one(self):
        g, z = occupied_poisson([1.5, 1.0], [1.0, 0.0])
        result = solve_dual_fixed_point(g, z)
        self.assertAlmostEqual(result.h[0], 0.417188, delta=5e-7)
        self.assertEqual(result.h[1], 1.0)


class EpidemicReportTests(SimpleTestCase):
    def report(self, lam, p):
        _, report = analyze(from_poisson(lam), p)
        return report

    def test_subcritical(self):
        report = self.report([0.8, 0.6], [0.5, 0.5])
        self.assertEqual((report.p_ep, report.f), (0.0, 0.0))
        self.assertEqual(report.h_forward.h, (1.0, 1.0))
        self.assertEqual(report.iterations, 0)

    def test_known_values(self):
        for s, expected in ((1.5, 0.582812), (1.05, 0.0937018)):
            with self.subTest(s=s):
                report = self.report([s], [1.0])
                self.assertAlmostEqual(report.p_ep, expected, delta=5e-7)
                self.assertAlmostEqual(report.f, expected, delta=5e-7)
                self.assertTrue(report.converged)

    def test_two_class_input(self):
        report = self.report([1.0, 1.0], [1.0, 0.5])
        self.assertAlmostEqual(report.p_ep, 0.582812, delta=5e-7)

    def test_closed_form_agrees_with_the_fixed_point(self):
        rng = np.random.default_rng(7)
        for s in np.linspace(1.04, 3.0, 50):
            weight = rng.uniform(0.1, 0.9)
            p = rng.uniform(0.3, 1.0, size=2)
            lam = np.array([weight, 1.0 - weight]) * s / p
            report = self.report(lam, p)
            closed = er_closed_form(ERParams(lam, p))
            self.assertAlmostEqual(report.p_ep, closed.p_ep, delta=1e-8)
            self.assertAlmostEqual(report.f, closed.f, delta=1e-8)
            self.assertAlmostEqual(report.p_ep, report.f, delta=1e-10)

    def test_dual_network_swaps_probability_and_fraction(self):
        dist = asymmetric_table()
        _, forward = analyze(from_distribution(dist), [0.8])
        _, backward = analyze(from_distribution(dist.swapped()), [0.8])
        self.assertGreater(abs(forward.p_ep - forward.f), 1e-3)
        self.assertAlmostEqual(forward.p_ep, backward.f, delta=1e-10)
        self.assertAlmostEqual(forward.f, backward.p_ep, delta=1e-10)

    def test_monotone_in_s(self):
        values = [
            self.report([s], [1.0]).p_ep for s in np.linspace(0.5, 3.0, 26)
        ]
        self.assertTrue(np.all(np.diff(values) >= 0.0))

    def test_subcritical_short_circuit(self):
        g, z = occupied_poisson([3.0], [1.0])
        outbreak, _ = analyze(from_poisson([0.5]), [1.0])
        report = epidemic_report(g, z, outbreak)
        self.assertEqual(report.p_ep, 0.0)

    def test_threshold_has_no_giant_component(self):
        for lam, p in (([2.0], [0.5]), ([1.0, 1.0], [0.5, 0.5])):
            with self.subTest(lam=lam):
                outbreak, report = analyze(from_poisson(lam), p)
                self.assertTrue(outbreak.supercritical)
                self.assertEqual((report.p_ep, report.f), (0.0, 0.0))
                self.assertEqual(report.iterations, 0)

    def test_decoupled_supercritical_layers(self):
        outbreak, report = analyze(
            from_distribution(two_layer_table()), [1.0, 1.0]
        )
        self.assertAlmostEqual(outbreak.det_a, 0.25)
        self.assertTrue(outbreak.supercritical)
        self.assertAlmostEqual(report.p_ep, 1.0, delta=1e-12)
        self.assertAlmostEqual(report.f, 1.0, delta=1e-12)

    def test_single_supercritical_layer(self):
        dist = JointDegreeDistribution(
            1, {DegreeVector([1], [3]): 0.5, DegreeVector([3], [1]): 0.5}
        )
        outbreak, report = analyze(from_distribution(dist), [1.0])
        self.assertAlmostEqual(outbreak.det_a, -0.5)
        self.assertAlmostEqual(report.p_ep, 1.0, delta=1e-12)

    def test_asymmetric_table_against_bow_tie_shares(self):
        n_nodes, p = 20000, [0.8]
        graph = skewed_out_degree_graph(n_nodes, trial_rng(13, 0, 0))
        _, report = analyze(
            from_distribution(empirical_distribution(graph)), p
        )

        p_ep_shares, f_shares = [], []
        for trial in range(8):
            occupied = occupy_sample(graph, p, trial_rng(13, trial, 1))
            parts = decompose(occupied)
            p_ep_shares.append((len(parts.gscc) + len(parts.gin)) / n_nodes)
            f_shares.append((len(parts.gscc) + len(parts.gout)) / n_nodes)

        # nodes without out-edges never start an epidemic
        self.assertGreater(report.f - report.p_ep, 0.05)
        self.assertAlmostEqual(np.mean(p_ep_shares), report.p_ep, delta=0.01)
        self.assertAlmostEqual(np.mean(f_shares), report.f, delta=0.01)

    def test_serializer_follows_the_schema(self):
        data = EpidemicReportSerializer(self.report([2.0], [0.75])).data
        jsonschema.validate(data, EPIDEMIC_REPORT_SCHEMA)
        self.assertEqual(data["h_forward"], data["h_dual"])


class ClosedFormTests(SimpleTestCase):
    def test_threshold(self):
        self.assertEqual(er_closed_form(ERParams((1.0,), (1.0,))).p_ep, 0.0)

    def test_known_values(self):
        for s, expected in ((1.2, 0.313698), (2.0, 0.796812)):
            report = er_closed_form(ERParams((s,), (1.0,)))
            self.assertAlmostEqual(report.p_ep, expected, delta=5e-7)
            self.assertEqual(report.p_ep, report.f)

    def test_s_sums_over_classes(self):
        self.assertAlmostEqual(ERParams((0.8, 0.6), (0.5, 0.5)).s, 0.7)

    def test_from_network_size(self):
        params = er_params_from_network_size(1000, [0.001, 0.0005], [1, 1])
        self.assertAlmostEqual(params.s, 1.5)

    def test_invalid_params(self):
        with self.assertRaises(DomainError):
            ERParams((1.0,), (1.5,))
        with self.assertRaises(DomainError):
            ERParams((-1.0,), (0.5,))


class LambertWTests(SimpleTestCase):
    def test_endpoints(self):
        self.assertEqual(lambert_w0(0.0), 0.0)
        self.assertAlmostEqual(lambert_w0(BRANCH_POINT), -1.0, delta=1e-8)
        self.assertAlmostEqual(lambert_w0(math.e), 1.0, delta=1e-15)

    def test_negative_argument(self):
        self.assertAlmostEqual(
            lambert_w0(-2.0 * math.exp(-2.0)), -0.406376, delta=1e-6
        )

    def test_below_the_branch_point(self):
        with self.assertRaises(DomainError):
            lambert_w0(-0.5)
        with self.assertRaises(DomainError):
            lambert_w0(float("nan"))

    def test_round_trip(self):
        grid = np.concatenate(
            [
                np.linspace(BRANCH_POINT, 10.0, 1000),
                BRANCH_POINT + np.logspace(-16, -2, 30),
            ]
        )
        for z in grid:
            w = lambert_w0(float(z))
            self.assertGreaterEqual(w, -1.0)
            self.assertLessEqual(
                abs(w * math.exp(w) - z), 1e-12 * max(1.0, abs(z)), msg=z
            )

    @given(st.floats(BRANCH_POINT, 1e6))
    def test_principal_branch(self, z):
        w = lambert_w0(z)
        self.assertGreaterEqual(w, -1.0)
        self.assertLessEqual(
            abs(w * math.exp(w) - z), 1e-12 * max(1.0, abs(z))
        )


class EdgeFailureTests(SimpleTestCase):
    def test_single_edge(self):
        g = TypedDigraph.from_edges(2, [(0, 1, 0)], 1)
        self.assertEqual(edge_failure_epidemic(g, 0, [1.0]).p_ep, 0.0)

    def test_subcritical_graph(self):
        g = generate_er(2000, [0.5], trial_rng(3, 0, 0))
        self.assertEqual(edge_failure_epidemic(g, 17, [1.0]).p_ep, 0.0)

    def test_large_supercritical_graph(self):
        n_nodes = 10000
        g = generate_er(n_nodes, [1.0, 1.0], trial_rng(5, 0, 0))
        _, before = analyze(
            from_distribution(empirical_distribution(g)), [0.9, 0.9]
        )
        after = edge_failure_epidemic(g, 123, [0.9, 0.9])
        self.assertGreater(before.p_ep, 0.5)
        self.assertLess(abs(after.p_ep - before.p_ep), 10.0 / n_nodes)

    def test_invalid_edge(self):
        g = TypedDigraph.from_edges(2, [(0, 1, 0)], 1)
        with self.assertRaises(DomainError):
            edge_failure_epidemic(g, 1, [1.0])


class AnalyzeCommandTests(TemporaryDirectoryMixin, SimpleTestCase):
    def run_command(self, *args):
        out = io.StringIO()
        call_command("analyze", *args, stdout=out)
        data = json.loads(out.getvalue())
        jsonschema.validate(data, ANALYSIS_SCHEMA)
        return data

    def test_cycle_without_occupation(self):
        cycle = TypedDigraph.from_edges(
            3, [(0, 1, 0), (1, 2, 0), (2, 0, 0)], 1
        )
        path = edge_list_file(self.tmp, cycle)
        data = self.run_command("--graph", path, "--p", "0.0")
        self.assertEqual(data["outbreak"]["e_s_node"], 1.0)
        self.assertEqual(data["epidemic"]["p_ep"], 0.0)

    def test_poisson_parameters(self):
        data = self.run_command("--lambda", "0.8", "0.6", "--p", "0.5", "0.5")
        self.assertAlmostEqual(data["outbreak"]["det_a"], 0.3)
        self.assertAlmostEqual(data["outbreak"]["e_s_node"], 10 / 3)
        self.assertFalse(data["outbreak"]["supercritical"])

    def test_network_size_and_edge_probabilities(self):
        data = self.run_command(
            "--network-size", "1000", "--q", "0.0015", "--p", "1.0"
        )
        self.assertTrue(data["outbreak"]["supercritical"])
        self.assertAlmostEqual(data["epidemic"]["p_ep"], 0.582812, delta=5e-7)

    def test_threshold_parameters(self):
        data = self.run_command("--lambda", "2", "--p", "0.5")
        self.assertTrue(data["outbreak"]["supercritical"])
        self.assertIsNone(data["outbreak"]["e_s_node"])
        self.assertEqual(data["epidemic"]["p_ep"], 0.0)
        self.assertEqual(data["epidemic"]["f"], 0.0)

    def test_distribution_file(self):
        path = Path(self.tmp) / "dist.json"
        path.write_text(
            json.dumps(DistributionSerializer(asymmetric_table()).data)
        )
        data = self.run_command("--distribution", str(path), "--p", "0.8")
        self.assertTrue(data["outbreak"]["supercritical"])
        self.assertNotAlmostEqual(
            data["epidemic"]["p_ep"], data["epidemic"]["f"], places=3
        )

    def test_config_file_and_overriding_flags(self):
        path = Path(self.tmp) / "config.json"
        path.write_text(json.dumps({"lambda": [0.8, 0.6], "p": [1.0, 1.0]}))
        data = self.run_command("--config", str(path), "--p", "0.5", "0.5")
        self.assertAlmostEqual(data["outbreak"]["det_a"], 0.3)

    def test_output_file(self):
        output = Path(self.tmp) / "report.json"
        call_command(
            "analyze", "--lambda", "2", "--p", "0.25", "--output", str(output)
        )
        data = json.loads(output.read_text())
        self.assertAlmostEqual(data["outbreak"]["e_s_node"], 2.0)

    def assert_usage_error(self, *args):
        with self.assertRaises(CommandError) as caught:
            call_command("analyze", *args, stdout=io.StringIO())
        self.assertEqual(caught.exception.returncode, 2)
        return caught.exception

    def test_probability_count_must_match_the_classes(self):
        self.assert_usage_error("--lambda", "0.8", "0.6", "--p", "0.5")
        cycle = TypedDigraph.from_edges(2, [(0, 1, 0), (1, 0, 0)], 1)
        path = edge_list_file(self.tmp, cycle)
        self.assert_usage_error("--graph", path, "--p", "0.5", "0.5")

    def test_exactly_one_source(self):
        self.assert_usage_error("--p", "0.5")
        self.assert_usage_error(
            "--lambda", "1", "--network-size", "10", "--q", "0.1", "--p", "1"
        )

    def test_network_size_needs_one_probability_per_class(self):
        self.assert_usage_error(
            "--network-size", "1000", "--q", "0.001", "0.002", "--p", "1"
        )

    def test_probability_outside_the_unit_interval(self):
        self.assert_usage_error("--lambda", "1", "--p", "1.5")

    def test_malformed_graph_file(self):
        path = Path(self.tmp) / "bad.tsv"
        path.write_text("# netpercolate-edges v1 nodes=2 classes=1\n0 1 0\n")
        error = self.assert_usage_error("--graph", str(path), "--p", "0.5")
        self.assertIn("line 2", str(error))

    def test_unknown_config_key(self):
        path = Path(self.tmp) / "config.json"
        path.write_text(json.dumps({"lambda": [1.0], "p": [1.0], "x": 1}))
        self.assert_usage_error("--config", str(path))


class SweepCommandTests(SimpleTestCase):
    def sweep(self, *args):
        out = io.StringIO()
        call_command("sweep", *args, stdout=out)
        return out.getvalue()

    def test_grid_from_one_to_two(self):
        lines = self.sweep("1.0:0.05:2.0").splitlines()
        self.assertEqual(lines[0], "s,p_ep")
        rows = [tuple(map(float, line.split(","))) for line in lines[1:]]
        self.assertEqual(len(rows), len(ER_CURVE))
        for (s, p_ep), (expected_s, expected) in zip(rows, ER_CURVE):
            self.assertAlmostEqual(s, expected_s, delta=1e-9)
            self.assertAlmostEqual(p_ep, expected, delta=5e-6)

    def test_six_decimals(self):
        text = self.sweep(
            "--s-from", "1.9", "--s-step", "0.1", "--s-to", "1.9"
        )
        self.assertRegex(text.splitlines()[1], r"^1\.900000,0\.76724\d$")

    def test_json_rows(self):
        data = json.loads(self.sweep("1.0:0.25:2.0", "--format", "json"))
        jsonschema.validate(data, SWEEP_SCHEMA)
        self.assertEqual(
            [row["s"] for row in data], [1.0, 1.25, 1.5, 1.75, 2.0]
        )
        self.assertAlmostEqual(data[1]["p_ep"], 0.37137, delta=5e-6)

    def test_invalid_ranges(self):
        invalid = (
            ("2.0:0.1:1.0",),
            ("1.0:0:2.0",),
            ("1.0:-0.1:2.0",),
            ("1.0-2.0",),
            (),
        )
        for args in invalid:
            with self.subTest(args=args):
                with self.assertRaises(CommandError) as caught:
                    self.sweep(*args)
                self.assertEqual(caught.exception.returncode, 2)
