import logging
import re
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np
from scipy.sparse import csgraph

from config.exceptions import DomainError, ParseError
from graph_service.models import ComponentDecomposition, TypedDigraph

logger = logging.getLogger(__name__)

EDGE_LIST_HEADER = re.compile(
    r"^#\s*netpercolate-edges\s+v1\s+nodes=(\d+)\s+classes=(\d+)\s*$"
)


def decompose(g: TypedDigraph) -> ComponentDecomposition:
    """Split the nodes into GSCC, GIN, GOUT and the rest.

    The giant component is the largest strongly connected component; ties go
    to the component holding the lowest node index.
    """
    if g.node_count == 0:
        empty = frozenset()
        return ComponentDecomposition(empty, empty, empty, empty)

    _, labels = csgraph.connected_components(
        g.adjacency, directed=True, connection="strong"
    )
    sizes = np.bincount(labels)
    largest = np.flatnonzero(sizes == sizes.max())
    # np.unique returns first occurrences, i.e. each label's lowest node.
    _, first_node = np.unique(labels, return_index=True)
    giant_label = min(largest, key=lambda label: first_node[label])
    root = int(first_node[giant_label])

    in_gscc = labels == giant_label
    in_gout = _reach_mask(g.adjacency, root) & ~in_gscc
    in_gin = _reach_mask(g.reverse_adjacency, root) & ~in_gscc
    in_rest = ~(in_gscc | in_gin | in_gout)

    decomposition = ComponentDecomposition(
        gscc=_node_set(in_gscc),
        gin=_node_set(in_gin),
        gout=_node_set(in_gout),
        rest=_node_set(in_rest),
    )
    logger.debug("decomposed %s into %s", g, decomposition.sizes)
    return decomposition


def reachable_set(g: TypedDigraph, seed: int) -> frozenset[int]:
    _check_node(g, seed)
    return frozenset(reachable_nodes(g, seed).tolist())


def reachable_nodes(g: TypedDigraph, seed: int) -> np.ndarray:
    """Array form of reachable_set, for callers that only need sizes."""
    return csgraph.breadth_first_order(
        g.adjacency, seed, directed=True, return_predecessors=False
    )


def split_edge(g: TypedDigraph, edge_index: int) -> tuple[TypedDigraph, int]:
    """Replace edge u->v by u->z->v through a fresh node z.

    u->z takes the original edge's position, z->v is appended last; both keep
    the original class.
    """
    if not 0 <= edge_index < g.edge_count:
        raise DomainError(
            f"edge index {edge_index} out of range for {g.edge_count} edges"
        )
    new_node = g.node_count
    edge_class = g.cls[edge_index]

    dst = g.dst.copy()
    dst[edge_index] = new_node
    split = TypedDigraph(
        node_count=g.node_count + 1,
        n_classes=g.n_classes,
        src=np.append(g.src, new_node),
        dst=np.append(dst, g.dst[edge_index]),
        cls=np.append(g.cls, edge_class),
    )
    return split, new_node


def reverse(g: TypedDigraph) -> TypedDigraph:
    """The dual network: same nodes, every edge pointing the other way."""
    return TypedDigraph(
        node_count=g.node_count,
        n_classes=g.n_classes,
        src=g.dst,
        dst=g.src,
        cls=g.cls,
    )


def parse_edge_list(lines: Iterable[str]) -> TypedDigraph:
    header = None
    edges = []
    for line_number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if header is None:
            if not line:
                continue
            match = EDGE_LIST_HEADER.match(line)
            if not match:
                raise ParseError(
                    "expected '# netpercolate-edges v1 nodes=<N> "
                    "classes=<n>' header",
                    line_number,
                )
            header = int(match.group(1)), int(match.group(2))
            continue
        if not line or line.startswith("#"):
            continue

        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(
                f"expected 3 tab-separated fields, got {len(fields)}",
                line_number,
            )
        try:
            src, dst, edge_class = (int(value) for value in fields)
        except ValueError:
            raise ParseError("fields must be decimal integers", line_number)

        node_count, n_classes = header
        if not (0 <= src < node_count and 0 <= dst < node_count):
            raise ParseError(
                f"node index out of range for {node_count} nodes", line_number
            )
        if not 0 <= edge_class < n_classes:
            raise ParseError(
                f"class out of range for {n_classes} classes", line_number
            )
        edges.append((src, dst, edge_class))

    if header is None:
        raise ParseError("missing header", 1)
    node_count, n_classes = header
    return TypedDigraph.from_edges(node_count, edges, n_classes)


def read_edge_list(path: str | Path) -> TypedDigraph:
    with open(path, encoding="utf-8") as stream:
        g = parse_edge_list(stream)
    logger.info("read %s from %s", g, path)
    return g


def write_edge_list(g: TypedDigraph, stream: TextIO) -> None:
    stream.write(
        f"# netpercolate-edges v1 nodes={g.node_count} "
        f"classes={g.n_classes}\n"
    )
    for src, dst, edge_class in g:
        stream.write(f"{src}\t{dst}\t{edge_class}\n")


def _reach_mask(adjacency, root: int) -> np.ndarray:
    mask = np.zeros(adjacency.shape[0], dtype=bool)
    mask[
        csgraph.breadth_first_order(
            adjacency, root, directed=True, return_predecessors=False
        )
    ] = True
    return mask


def _node_set(mask: np.ndarray) -> frozenset[int]:
    return frozenset(np.flatnonzero(mask).tolist())


def _check_node(g: TypedDigraph, node: int) -> None:
    if not 0 <= node < g.node_count:
        raise DomainError(
            f"node {node} out of range for {g.node_count} nodes"
        )
