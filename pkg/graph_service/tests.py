import io
import json
from pathlib import Path

import networkx as nx
from django.core.management import CommandError, call_command
from django.test import SimpleTestCase
from hypothesis import given

from config.exceptions import DomainError, ParseError
from config.testing import TemporaryDirectoryMixin, edge_list_file, graphs
from graph_service.models import TypedDigraph
from graph_service.utils import (
    decompose,
    parse_edge_list,
    reachable_set,
    read_edge_list,
    reverse,
    split_edge,
    write_edge_list,
)


def digraph(node_count, edges, n_classes=1):
    return TypedDigraph.from_edges(
        node_count, [(u, v, c) for u, v, c in edges], n_classes
    )


def cycle(n=3):
    return digraph(n, [(i, (i + 1) % n, 0) for i in range(n)])


PATH = digraph(3, [(0, 1, 0), (1, 2, 0)])
BOW_TIE = digraph(4, [(0, 1, 0), (1, 2, 0), (2, 1, 0), (2, 3, 0)])


def as_networkx(g):
    graph = nx.MultiDiGraph()
    graph.add_nodes_from(range(g.node_count))
    graph.add_edges_from((u, v) for u, v, _ in g)
    return graph


class TypedDigraphTests(SimpleTestCase):
    def test_edges_keep_their_order_and_class(self):
        g = digraph(2, [(0, 1, 1), (1, 1, 0), (0, 1, 1)], n_classes=2)
        self.assertEqual(g.edges, [(0, 1, 1), (1, 1, 0), (0, 1, 1)])
        self.assertEqual(g.edge_count, 3)

    def test_endpoint_out_of_range_is_rejected(self):
        with self.assertRaises(DomainError):
            digraph(2, [(0, 2, 0)])

    def test_class_out_of_range_is_rejected(self):
        with self.assertRaises(DomainError):
            digraph(2, [(0, 1, 1)], n_classes=1)

    def test_edge_arrays_are_read_only(self):
        with self.assertRaises(ValueError):
            cycle().src[0] = 2


class DecomposeTests(SimpleTestCase):
    def test_cycle_is_one_strong_component(self):
        decomposition = decompose(cycle())
        self.assertEqual(decomposition.gscc, {0, 1, 2})
        self.assertEqual(decomposition.gin, set())
        self.assertEqual(decomposition.gout, set())

    def test_bow_tie(self):
        decomposition = decompose(BOW_TIE)
        self.assertEqual(decomposition.gscc, {1, 2})
        self.assertEqual(decomposition.gin, {0})
        self.assertEqual(decomposition.gout, {3})
        self.assertEqual(decomposition.rest, set())

    def test_singleton_tie_goes_to_lowest_node(self):
        decomposition = decompose(PATH)
        self.assertEqual(decomposition.gscc, {0})
        self.assertEqual(decomposition.gin, set())
        self.assertEqual(decomposition.gout, {1, 2})

    def test_empty_graph(self):
        decomposition = decompose(digraph(0, []))
        self.assertEqual(
            decomposition.sizes, {"gscc": 0, "gin": 0, "gout": 0, "rest": 0}
        )

    def test_unrelated_nodes_are_rest(self):
        g = digraph(5, [(0, 1, 0), (1, 0, 0), (3, 4, 0)])
        decomposition = decompose(g)
        self.assertEqual(decomposition.gscc, {0, 1})
        self.assertEqual(decomposition.rest, {2, 3, 4})

    @given(graphs())
    def test_partition(self, g):
        d = decompose(g)
        parts = [d.gscc, d.gin, d.gout, d.rest]
        self.assertEqual(sum(map(len, parts)), g.node_count)
        self.assertEqual(set().union(*parts), set(range(g.node_count)))

    @given(graphs())
    def test_gscc_is_a_largest_strong_component(self, g):
        components = list(nx.strongly_connected_components(as_networkx(g)))
        gscc = decompose(g).gscc
        self.assertIn(gscc, components)
        self.assertEqual(len(gscc), max(map(len, components)))

    @given(graphs())
    def test_reachability_around_gscc(self, g):
        d = decompose(g)
        for node in d.gin:
            self.assertTrue(d.gscc <= reachable_set(g, node))
        for node in d.gscc:
            self.assertTrue(d.gscc | d.gout <= reachable_set(g, node))

    @given(graphs())
    def test_reverse_swaps_gin_and_gout(self, g):
        forward, backward = decompose(g), decompose(reverse(g))
        self.assertEqual(forward.gscc, backward.gscc)
        self.assertEqual(forward.gin, backward.gout)
        self.assertEqual(forward.gout, backward.gin)


class ReachableSetTests(SimpleTestCase):
    def test_path(self):
        self.assertEqual(reachable_set(PATH, 0), {0, 1, 2})
        self.assertEqual(reachable_set(PATH, 2), {2})

    def test_cycle(self):
        self.assertEqual(reachable_set(cycle(), 1), {0, 1, 2})

    def test_seed_out_of_range(self):
        with self.assertRaises(DomainError):
            reachable_set(PATH, 3)

    @given(graphs())
    def test_matches_networkx(self, g):
        graph = as_networkx(g)
        for seed in range(g.node_count):
            self.assertEqual(
                reachable_set(g, seed), nx.descendants(graph, seed) | {seed}
            )


class SplitEdgeTests(SimpleTestCase):
    def test_single_edge(self):
        split, new_node = split_edge(digraph(2, [(0, 1, 0)]), 0)
        self.assertEqual(new_node, 2)
        self.assertEqual(split.node_count, 3)
        self.assertEqual(split.edges, [(0, 2, 0), (2, 1, 0)])

    def test_keeps_the_class_and_other_edges(self):
        g = digraph(3, [(0, 1, 0), (1, 2, 1), (2, 0, 0)], n_classes=2)
        split, new_node = split_edge(g, 1)
        self.assertEqual(
            split.edges, [(0, 1, 0), (1, 3, 1), (2, 0, 0), (3, 2, 1)]
        )
        self.assertEqual(split.edge_count, g.edge_count + 1)

    def test_split_cycle_stays_strongly_connected(self):
        split, _ = split_edge(cycle(), 0)
        self.assertEqual(decompose(split).gscc, {0, 1, 2, 3})

    def test_invalid_edge_index(self):
        with self.assertRaises(DomainError):
            split_edge(PATH, 2)
        with self.assertRaises(DomainError):
            split_edge(PATH, -1)

    @given(graphs(min_nodes=2).filter(lambda g: g.edge_count > 0))
    def test_reachability_among_original_nodes_is_preserved(self, g):
        closure = nx.transitive_closure(
            nx.DiGraph(as_networkx(g)), reflexive=True
        )
        for index in range(g.edge_count):
            split, new_node = split_edge(g, index)
            for seed in range(g.node_count):
                self.assertEqual(
                    reachable_set(split, seed) - {new_node},
                    set(closure.successors(seed)),
                )


class EdgeListTests(TemporaryDirectoryMixin, SimpleTestCase):
    def test_parse(self):
        g = parse_edge_list(
            [
                "\n",
                "# netpercolate-edges v1 nodes=3 classes=2\n",
                "0\t1\t0\n",
                "# a comment\n",
                "\n",
                "1\t2\t1\n",
            ]
        )
        self.assertEqual(g.node_count, 3)
        self.assertEqual(g.n_classes, 2)
        self.assertEqual(g.edges, [(0, 1, 0), (1, 2, 1)])

    def test_missing_header(self):
        with self.assertRaises(ParseError) as caught:
            parse_edge_list(["0\t1\t0\n"])
        self.assertEqual(caught.exception.line_number, 1)

    def test_empty_input_has_no_header(self):
        with self.assertRaises(ParseError):
            parse_edge_list([])

    def test_malformed_line_reports_its_number(self):
        lines = [
            "# netpercolate-edges v1 nodes=3 classes=1",
            "0\t1\t0",
            "1 2 0",
        ]
        with self.assertRaises(ParseError) as caught:
            parse_edge_list(lines)
        self.assertEqual(caught.exception.line_number, 3)
        self.assertIn("line 3", str(caught.exception))

    def test_non_integer_and_out_of_range_fields(self):
        header = "# netpercolate-edges v1 nodes=2 classes=1"
        for line in ("0\tone\t0", "0\t2\t0", "0\t1\t1", "-1\t0\t0"):
            with self.subTest(line=line), self.assertRaises(ParseError):
                parse_edge_list([header, line])

    def test_write_then_read(self):
        g = digraph(4, [(0, 1, 1), (3, 3, 0), (0, 1, 1)], n_classes=2)
        self.assertEqual(read_edge_list(edge_list_file(self.tmp, g)), g)

    def test_written_header(self):
        buffer = io.StringIO()
        write_edge_list(PATH, buffer)
        self.assertEqual(
            buffer.getvalue().splitlines()[0],
            "# netpercolate-edges v1 nodes=3 classes=1",
        )


class SplitEdgeCommandTests(TemporaryDirectoryMixin, SimpleTestCase):
    def test_writes_the_split_graph(self):
        path = edge_list_file(self.tmp, digraph(2, [(0, 1, 0)]))
        out = io.StringIO()
        call_command("split_edge", "--graph", path, "--edge", "0", stdout=out)
        split = parse_edge_list(out.getvalue().splitlines())
        self.assertEqual(split.edges, [(0, 2, 0), (2, 1, 0)])

    def test_output_file(self):
        path = edge_list_file(self.tmp, cycle())
        output = str(Path(self.tmp) / "split.tsv")
        call_command(
            "split_edge", "--graph", path, "--edge", "2", "--output", output
        )
        self.assertEqual(read_edge_list(output).node_count, 4)

    def test_edge_failure_report(self):
        path = edge_list_file(self.tmp, digraph(2, [(0, 1, 0)]))
        out = io.StringIO()
        call_command(
            "split_edge",
            "--graph",
            path,
            "--edge",
            "0",
            "--p",
            "1.0",
            stdout=out,
        )
        report = json.loads(out.getvalue())
        self.assertEqual(report["p_ep"], 0.0)
        self.assertEqual(report["f"], 0.0)

    def test_bad_edge_index_is_a_usage_error(self):
        path = edge_list_file(self.tmp, PATH)
        with self.assertRaises(CommandError) as caught:
            call_command("split_edge", "--graph", path, "--edge", "5")
        self.assertEqual(caught.exception.returncode, 2)

    def test_missing_file_is_a_usage_error(self):
        missing = str(Path(self.tmp) / "missing.tsv")
        with self.assertRaises(CommandError) as caught:
            call_command("split_edge", "--graph", missing, "--edge", "0")
        self.assertEqual(caught.exception.returncode, 2)
