"""Hypothesis strategies and fixtures shared by the app test suites."""

import tempfile
from pathlib import Path

from hypothesis import settings
from hypothesis import strategies as st

from degree_service.models import DegreeVector, JointDegreeDistribution
from graph_service.models import TypedDigraph
from graph_service.utils import write_edge_list

settings.register_profile("netpercolate", deadline=None, max_examples=50)
settings.load_profile("netpercolate")


@st.composite
def graphs(draw, max_nodes=8, max_classes=2, max_edges=16, min_nodes=1):
    node_count = draw(st.integers(min_nodes, max_nodes))
    n_classes = draw(st.integers(1, max_classes))
    edges = draw(
        st.lists(
            st.tuples(
                st.integers(0, node_count - 1),
                st.integers(0, node_count - 1),
                st.integers(0, n_classes - 1),
            ),
            max_size=max_edges,
        )
    )
    return TypedDigraph.from_edges(node_count, edges, n_classes)


@st.composite
def distributions(draw, max_classes=3, max_degree=2, max_entries=4):
    """Small normalized tables with random support and weights."""
    n_classes = draw(st.integers(1, max_classes))
    degrees = st.lists(
        st.integers(0, max_degree), min_size=n_classes, max_size=n_classes
    )
    vectors = draw(
        st.lists(
            st.builds(DegreeVector, degrees, degrees),
            min_size=1,
            max_size=max_entries,
            unique=True,
        )
    )
    weights = draw(
        st.lists(
            st.floats(0.05, 1.0),
            min_size=len(vectors),
            max_size=len(vectors),
        )
    )
    total = sum(weights)
    return JointDegreeDistribution(
        n_classes,
        {vector: weight / total for vector, weight in zip(vectors, weights)},
    )


def probability_vectors(n_classes):
    return st.lists(
        st.floats(0.0, 1.0), min_size=n_classes, max_size=n_classes
    )


def edge_list_file(directory: str, graph: TypedDigraph, name="graph.tsv"):
    path = Path(directory) / name
    with open(path, "w", encoding="utf-8") as stream:
        write_edge_list(graph, stream)
    return str(path)


class TemporaryDirectoryMixin:
    """Gives each test a scratch directory in self.tmp."""

    def setUp(self):
        super().setUp()
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.tmp = directory.name
