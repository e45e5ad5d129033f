import io
import json
import math
from pathlib import Path

import jsonschema
import numpy as np
from django.core.management import CommandError, call_command
from django.test import SimpleTestCase, override_settings, tag

from config.exceptions import DomainError
from config.testing import TemporaryDirectoryMixin
from epidemic_service.models import ERParams
from epidemic_service.utils import er_closed_form
from simulation_service.models import SimConfig
from simulation_service.serializers import (
    SIM_ESTIMATES_SCHEMA,
    TRIAL_CSV_HEADER,
    SimEstimatesSerializer,
    SimulateConfigSerializer,
    to_sim_config,
)
from simulation_service.utils import (
    estimate,
    generate_er,
    giant_cutoff,
    occupy_sample,
    run_trial,
    trial_rng,
)


def config(**overrides):
    values = {
        "n_nodes": 500,
        "lam": (0.8, 0.6),
        "p": (0.5, 0.5),
        "trials": 4,
        "seed": 1,
        "seeds_per_graph": 100,
        "edge_seeds_per_class": 20,
    }
    values.update(overrides)
    return SimConfig(**values)


class TrialRngTests(SimpleTestCase):
    def test_same_triple_same_stream(self):
        np.testing.assert_array_equal(
            trial_rng(7, 3, 1).random(5), trial_rng(7, 3, 1).random(5)
        )

    def test_streams_are_distinct(self):
        draws = {
            tuple(trial_rng(7, trial, stream).integers(0, 2**32, size=4))
            for trial in range(3)
            for stream in range(3)
        }
        self.assertEqual(len(draws), 9)

    def test_seed_changes_the_stream(self):
        self.assertFalse(
            np.array_equal(
                trial_rng(0, 0, 0).random(5), trial_rng(1, 0, 0).random(5)
            )
        )


class GenerateErTests(SimpleTestCase):
    def test_zero_mean_degree(self):
        g = generate_er(100, [0.0, 0.0], trial_rng(0, 0, 0))
        self.assertEqual(g.node_count, 100)
        self.assertEqual(g.edge_count, 0)

    def test_deterministic(self):
        first = generate_er(200, [1.0, 0.5], trial_rng(4, 2, 0))
        second = generate_er(200, [1.0, 0.5], trial_rng(4, 2, 0))
        self.assertEqual(first, second)

    def test_mean_degrees(self):
        n_nodes, lam = 100000, [2.0, 0.5]
        g = generate_er(n_nodes, lam, trial_rng(9, 0, 0))
        for edge_class, mean_degree in enumerate(lam):
            observed = np.count_nonzero(g.cls == edge_class) / n_nodes
            self.assertLess(
                abs(observed - mean_degree),
                4 * math.sqrt(mean_degree / n_nodes),
            )
        self.assertTrue(np.all((g.dst >= 0) & (g.dst < n_nodes)))

    def test_negative_mean_degree(self):
        with self.assertRaises(DomainError):
            generate_er(10, [-1.0], trial_rng(0, 0, 0))


class OccupySampleTests(SimpleTestCase):
    def setUp(self):
        self.graph = generate_er(20000, [2.0, 3.0], trial_rng(2, 0, 0))

    def test_full_occupation_keeps_every_edge(self):
        occupied = occupy_sample(self.graph, [1.0, 1.0], trial_rng(2, 0, 1))
        self.assertEqual(occupied, self.graph)

    def test_no_occupation_keeps_nothing(self):
        occupied = occupy_sample(self.graph, [0.0, 0.0], trial_rng(2, 0, 1))
        self.assertEqual(occupied.edge_count, 0)
        self.assertEqual(occupied.node_count, self.graph.node_count)

    def test_kept_edges_are_binomial(self):
        p = [0.3, 0.8]
        occupied = occupy_sample(self.graph, p, trial_rng(2, 0, 1))
        for edge_class, p_i in enumerate(p):
            total = np.count_nonzero(self.graph.cls == edge_class)
            kept = np.count_nonzero(occupied.cls == edge_class)
            sd = math.sqrt(total * p_i * (1 - p_i))
            self.assertLess(abs(kept - total * p_i), 4 * sd)

    def test_probability_count_must_match(self):
        with self.assertRaises(DomainError):
            occupy_sample(self.graph, [0.5], trial_rng(2, 0, 1))


class GiantCutoffTests(SimpleTestCase):
    def test_small_graphs_use_the_floor(self):
        self.assertEqual(giant_cutoff(10), 100)
        self.assertAlmostEqual(giant_cutoff(1000), 100, places=9)

    def test_large_graphs_scale(self):
        self.assertAlmostEqual(giant_cutoff(10**6), 10**4, places=6)

    @override_settings(NETPERCOLATE={"GIANT_CUTOFF_MIN": 5})
    def test_floor_comes_from_settings(self):
        self.assertAlmostEqual(giant_cutoff(8), 5)
        self.assertAlmostEqual(giant_cutoff(1000), 100, places=9)


class SimConfigTests(SimpleTestCase):
    def test_invalid_values(self):
        for overrides in (
            {"n_nodes": 0},
            {"p": (0.5,)},
            {"lam": (-0.1, 0.6)},
            {"p": (0.5, 1.5)},
            {"trials": 0},
            {"seed": -1},
            {"seeds_per_graph": 0},
        ):
            with self.subTest(**overrides), self.assertRaises(DomainError):
                config(**overrides)

    def test_settings_fill_missing_values(self):
        serializer = SimulateConfigSerializer(
            data={"n_nodes": 10, "lam": [1.0], "p": [0.5]}
        )
        self.assertTrue(serializer.is_valid(), serializer.errors)
        sim = to_sim_config(serializer.validated_data)
        self.assertEqual((sim.trials, sim.seed), (20, 0))
        self.assertEqual(sim.seeds_per_graph, 1000)
        self.assertEqual(sim.edge_seeds_per_class, 200)


class RunTrialTests(SimpleTestCase):
    def test_same_trial_same_result(self):
        payload = config().as_dict()
        self.assertEqual(run_trial(payload, 2), run_trial(payload, 2))

    def test_order_does_not_matter(self):
        payload = config().as_dict()
        forward = [run_trial(payload, trial) for trial in range(3)]
        backward = [run_trial(payload, trial) for trial in (2, 1, 0)]
        self.assertEqual(forward, backward[::-1])

    def test_result_fields(self):
        result = run_trial(config().as_dict(), 0)
        self.assertEqual(result["trial"], 0)
        self.assertFalse(result["giant"])
        self.assertLessEqual(result["small_outbreaks"], 100)
        self.assertGreaterEqual(result["mean_small_outbreak"], 1.0)
        self.assertEqual(len(result["mean_small_outbreak_by_class"]), 2)
        json.dumps(result)

    def test_supercritical_graph_has_a_giant_component(self):
        payload = config(n_nodes=5000, lam=(3.0,), p=(1.0,)).as_dict()
        result = run_trial(payload, 0)
        self.assertTrue(result["giant"])
        self.assertGreater(result["gscc"], giant_cutoff(5000))
        self.assertGreaterEqual(
            result["max_outbreak"], result["gscc"] + result["gout"]
        )


class EstimateTests(SimpleTestCase):
    def test_subcritical_mean_outbreak(self):
        sim = config(
            n_nodes=10000, trials=30, seeds_per_graph=1000, seed=3
        )
        estimates = estimate(sim)
        mean = estimates.mean_outbreak
        self.assertEqual(estimates.n_graphs, 30)
        self.assertEqual(mean.samples, 30)
        self.assertLess(abs(mean.value - 10 / 3), 3 * mean.standard_error)
        self.assertEqual(estimates.p_ep_hat.value, 0.0)
        self.assertEqual(estimates.f_hat.value, 0.0)
        for by_class in estimates.mean_outbreak_by_class:
            self.assertLess(
                abs(by_class.value - 10 / 3),
                3 * by_class.standard_error,
            )

    def test_no_occupation(self):
        estimates = estimate(config(p=(0.0, 0.0)))
        self.assertEqual(estimates.mean_outbreak.value, 1.0)
        self.assertEqual(estimates.mean_outbreak.standard_error, 0.0)
        self.assertEqual(estimates.p_ep_hat.value, 0.0)
        self.assertEqual(estimates.f_hat.value, 0.0)
        self.assertTrue(all(t.max_outbreak == 1 for t in estimates.trials))

    def test_class_without_occupied_edges_has_no_estimate(self):
        estimates = estimate(config(p=(0.5, 0.0)))
        self.assertEqual(estimates.mean_outbreak_by_class[1].samples, 0)
        self.assertIsNone(estimates.mean_outbreak_by_class[1].value)

    def test_reproducible(self):
        self.assertEqual(estimate(config()), estimate(config()))
        self.assertNotEqual(
            estimate(config()).trials, estimate(config(seed=2)).trials
        )

    def test_trials_come_back_in_order(self):
        estimates = estimate(config(trials=6))
        self.assertEqual([t.trial for t in estimates.trials], list(range(6)))

    def test_largest_subcritical_outbreak_vanishes_with_size(self):
        def largest_share(n_nodes):
            estimates = estimate(config(n_nodes=n_nodes, trials=5))
            largest = [t.max_outbreak for t in estimates.trials]
            return np.mean(largest) / n_nodes

        self.assertLess(largest_share(20000), largest_share(1000))

    @tag("slow")
    def test_supercritical_matches_the_closed_form(self):
        for s in (1.2, 1.5, 2.0):
            with self.subTest(s=s):
                estimates = estimate(
                    config(
                        n_nodes=100000,
                        lam=(s,),
                        p=(1.0,),
                        trials=20,
                        seeds_per_graph=200,
                        edge_seeds_per_class=0,
                    )
                )
                expected = er_closed_form(ERParams((s,), (1.0,))).p_ep
                self.assertAlmostEqual(
                    estimates.p_ep_hat.value, expected, delta=0.02
                )
                self.assertAlmostEqual(
                    estimates.f_hat.value, expected, delta=0.02
                )

    def test_serialized_estimates_follow_the_schema(self):
        data = SimEstimatesSerializer(estimate(config(p=(0.5, 0.0)))).data
        jsonschema.validate(
            json.loads(json.dumps(data)), SIM_ESTIMATES_SCHEMA
        )


class SimulateCommandTests(TemporaryDirectoryMixin, SimpleTestCase):
    ARGS = (
        "--n-nodes",
        "400",
        "--lambda",
        "0.8",
        "0.6",
        "--p",
        "0.5",
        "0.5",
        "--trials",
        "3",
        "--seeds-per-graph",
        "50",
        "--edge-seeds-per-class",
        "10",
    )

    def simulate(self, *args):
        out = io.StringIO()
        call_command("simulate", *args, stdout=out)
        return out.getvalue()

    def test_json_output(self):
        data = json.loads(self.simulate(*self.ARGS, "--seed", "5"))
        jsonschema.validate(data, SIM_ESTIMATES_SCHEMA)
        self.assertEqual(data["n_graphs"], 3)
        self.assertEqual(len(data["mean_outbreak_by_class"]), 2)

    def test_same_seed_same_bytes(self):
        self.assertEqual(
            self.simulate(*self.ARGS, "--seed", "42"),
            self.simulate(*self.ARGS, "--seed", "42"),
        )

    def test_csv_output(self):
        lines = self.simulate(*self.ARGS, "--format", "csv").splitlines()
        self.assertEqual(lines[0], ",".join(TRIAL_CSV_HEADER))
        self.assertEqual(len(lines), 4)
        self.assertEqual(
            [line.split(",")[0] for line in lines[1:]], ["0", "1", "2"]
        )

    def test_config_file(self):
        path = Path(self.tmp) / "simulate.json"
        path.write_text(
            json.dumps(
                {
                    "n-nodes": 300,
                    "lambda": [1.5],
                    "p": [0.0],
                    "trials": 2,
                    "seeds_per_graph": 20,
                }
            )
        )
        data = json.loads(self.simulate("--config", str(path)))
        self.assertEqual(data["n_graphs"], 2)
        self.assertEqual(data["p_ep_hat"]["value"], 0.0)
        self.assertEqual(data["mean_outbreak"]["value"], 1.0)

    def test_missing_mean_degrees(self):
        with self.assertRaises(CommandError) as caught:
            self.simulate("--n-nodes", "100", "--p", "0.5")
        self.assertEqual(caught.exception.returncode, 2)

    def test_mismatched_class_counts(self):
        with self.assertRaises(CommandError) as caught:
            self.simulate(
                "--n-nodes", "100", "--lambda", "1", "1", "--p", "0.5"
            )
        self.assertEqual(caught.exception.returncode, 2)

    def test_no_occupation_has_no_epidemic(self):
        data = json.loads(
            self.simulate(
                "--n-nodes",
                "300",
                "--lambda",
                "3",
                "--p",
                "0",
                "--trials",
                "2",
                "--seeds-per-graph",
                "20",
            )
        )
        self.assertEqual(data["p_ep_hat"]["value"], 0.0)
        self.assertEqual(data["f_hat"]["value"], 0.0)

    def test_output_file(self):
        output = Path(self.tmp) / "estimates.json"
        call_command("simulate", *self.ARGS, "--output", str(output))
        data = json.loads(output.read_text())
        self.assertEqual(data["n_graphs"], 3)

