import logging
from collections import defaultdict
from functools import reduce
from typing import Sequence

import numpy as np
from scipy.stats import binom

from config.exceptions import DomainError
from degree_service.models import (
    DegreeStats,
    DegreeVector,
    Direction,
    JointDegreeDistribution,
)
from graph_service.models import TypedDigraph

logger = logging.getLogger(__name__)

# Thinning spreads every entry over its whole downset; dust below this is
# dropped and the table renormalized.
PRUNE_BELOW = 1e-15


def validate_probabilities(p: Sequence[float], n_classes: int) -> np.ndarray:
    probabilities = np.asarray(p, dtype=float).reshape(-1)
    if len(probabilities) != n_classes:
        raise DomainError(
            f"expected {n_classes} occupation probabilities, "
            f"got {len(probabilities)}"
        )
    if not np.all((probabilities >= 0.0) & (probabilities <= 1.0)):
        raise DomainError(
            f"occupation probabilities must lie in [0, 1], got "
            f"{probabilities.tolist()}"
        )
    return probabilities


def empirical_distribution(g: TypedDigraph) -> JointDegreeDistribution:
    """Relative frequency of every per-class (in, out) degree vector."""
    if g.node_count == 0:
        raise DomainError("a graph without nodes has no degree distribution")

    in_counts = np.zeros((g.node_count, g.n_classes), dtype=np.int64)
    out_counts = np.zeros((g.node_count, g.n_classes), dtype=np.int64)
    np.add.at(in_counts, (g.dst, g.cls), 1)
    np.add.at(out_counts, (g.src, g.cls), 1)

    rows, counts = np.unique(
        np.hstack([in_counts, out_counts]), axis=0, return_counts=True
    )
    n = g.n_classes
    table = {
        DegreeVector(row[:n], row[n:]): count / g.node_count
        for row, count in zip(rows.tolist(), counts.tolist())
    }
    return JointDegreeDistribution(n, table)


def thin(
    dist: JointDegreeDistribution, p: Sequence[float]
) -> JointDegreeDistribution:
    """Keep every class-i edge end independently with probability p_i."""
    p = validate_probabilities(p, dist.n_classes)
    per_coordinate = np.concatenate([p, p])

    thinned = defaultdict(float)
    for vector, mass in dist.table.items():
        degrees = vector.in_by_class + vector.out_by_class
        factors = [
            binom.pmf(np.arange(degree + 1), degree, keep)
            for degree, keep in zip(degrees, per_coordinate)
        ]
        tensor = mass * reduce(np.multiply.outer, factors)
        for index in zip(*np.nonzero(tensor)):
            thinned[tuple(int(i) for i in index)] += tensor[index]

    n = dist.n_classes
    table = {
        DegreeVector(index[:n], index[n:]): float(mass)
        for index, mass in thinned.items()
        if mass >= PRUNE_BELOW
    }
    if len(table) < len(thinned):
        table = _normalized(table)
    return JointDegreeDistribution(n, table)


def stats(dist: JointDegreeDistribution) -> DegreeStats:
    return DegreeStats(tuple(dist.probabilities @ dist.in_degrees))


def out_stats(dist: JointDegreeDistribution) -> DegreeStats:
    """Mean out-degrees; equal to stats() for graph-derived distributions."""
    return DegreeStats(tuple(dist.probabilities @ dist.out_degrees))


def marginal(
    dist: JointDegreeDistribution, direction: Direction, edge_class: int
) -> np.ndarray:
    """pmf of the class-i in- or out-degree, indexed by degree."""
    if not 0 <= edge_class < dist.n_classes:
        raise DomainError(f"edge class {edge_class} out of range")
    degrees = dist.degrees(direction)[:, edge_class]
    return np.bincount(degrees, weights=dist.probabilities)


def _normalized(table: dict) -> dict:
    total = sum(table.values())
    return {vector: mass / total for vector, mass in table.items()}
