from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np
from scipy import sparse

from config.exceptions import DomainError

# Index into the class table of a TypedDigraph; always < n_classes.
EdgeClassId = int

Edge = tuple[int, int, EdgeClassId]


def _frozen_array(values, dtype=np.int64) -> np.ndarray:
    array = np.array(values, dtype=dtype).reshape(-1)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class TypedDigraph:
    """Directed multigraph whose edges carry an edge class label.

    Edges live in three parallel arrays (source, target, class) so that
    graphs with millions of edges stay cheap. Self-loops and parallel edges
    are allowed.
    """

    node_count: int
    n_classes: int
    src: np.ndarray = field(repr=False)
    dst: np.ndarray = field(repr=False)
    cls: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("src", "dst", "cls"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name)))

        if self.node_count < 0:
            raise DomainError("node_count must be nonnegative")
        if self.n_classes < 1:
            raise DomainError("a graph needs at least one edge class")
        if not (len(self.src) == len(self.dst) == len(self.cls)):
            raise DomainError("edge arrays must have equal length")
        if self.edge_count:
            if min(self.src.min(), self.dst.min(), self.cls.min()) < 0:
                raise DomainError("edge endpoints and classes are indices")
            if max(self.src.max(), self.dst.max()) >= self.node_count:
                raise DomainError(
                    f"edge endpoint out of range for {self.node_count} nodes"
                )
            if self.cls.max() >= self.n_classes:
                raise DomainError(
                    f"edge class out of range for {self.n_classes} classes"
                )

    @classmethod
    def from_edges(
        cls, node_count: int, edges: Iterable[Edge], n_classes: int
    ) -> "TypedDigraph":
        edge_list = list(edges)
        if edge_list:
            src, dst, classes = zip(*edge_list)
        else:
            src, dst, classes = (), (), ()
        return cls(
            node_count=node_count,
            n_classes=n_classes,
            src=src,
            dst=dst,
            cls=classes,
        )

    @property
    def edge_count(self) -> int:
        return len(self.src)

    @property
    def edges(self) -> list[Edge]:
        return list(self)

    def __iter__(self) -> Iterator[Edge]:
        return zip(self.src.tolist(), self.dst.tolist(), self.cls.tolist())

    def __eq__(self, other):
        if not isinstance(other, TypedDigraph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and self.n_classes == other.n_classes
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.cls, other.cls)
        )

    @cached_property
    def adjacency(self) -> sparse.csr_matrix:
        """Sparse adjacency; only its sparsity pattern is ever used."""
        data = np.ones(self.edge_count, dtype=np.int32)
        return sparse.csr_matrix(
            (data, (self.src, self.dst)),
            shape=(self.node_count, self.node_count),
        )

    @cached_property
    def reverse_adjacency(self) -> sparse.csr_matrix:
        return self.adjacency.transpose().tocsr()

    def __str__(self):
        return (
            f"TypedDigraph({self.node_count} nodes, {self.edge_count} edges, "
            f"{self.n_classes} classes)"
        )


@dataclass(frozen=True)
class ComponentDecomposition:
    """Bow-tie split of a digraph around its largest strong component."""

    gscc: frozenset[int]
    gin: frozenset[int]
    gout: frozenset[int]
    rest: frozenset[int]

    @property
    def sizes(self) -> dict[str, int]:
        return {
            "gscc": len(self.gscc),
            "gin": len(self.gin),
            "gout": len(self.gout),
            "rest": len(self.rest),
        }
