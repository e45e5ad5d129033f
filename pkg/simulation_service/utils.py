import logging
from dataclasses import asdict
from typing import Sequence

import numpy as np
from celery import group, shared_task
from django.conf import settings

from config.exceptions import DomainError
from degree_service.utils import validate_probabilities
from graph_service.models import TypedDigraph
from graph_service.utils import decompose, reachable_nodes
from simulation_service.models import (
    Estimate,
    SimConfig,
    SimEstimates,
    TrialResult,
)

logger = logging.getLogger(__name__)

# Stream ids under one (seed, trial) pair.
GRAPH_STREAM = 0
OCCUPATION_STREAM = 1
SEED_STREAM = 2


def trial_rng(seed: int, trial: int, stream: int) -> np.random.Generator:
    """Independent Philox stream for one (seed, trial, stream) triple."""
    sequence = np.random.SeedSequence(seed, spawn_key=(trial, stream))
    return np.random.Generator(np.random.Philox(sequence))


def generate_er(
    n_nodes: int, lam: Sequence[float], rng: np.random.Generator
) -> TypedDigraph:
    """Sparse-limit directed Erdos-Renyi graph with one layer per class.

    Every node draws Poisson(lam_i) class-i out-edges with uniform targets;
    classes are drawn in order from the same stream.
    """
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0.0):
        raise DomainError(f"mean degrees must be nonnegative: {lam.tolist()}")

    sources, targets, classes = [], [], []
    for edge_class, mean_degree in enumerate(lam):
        out_degrees = rng.poisson(mean_degree, size=n_nodes)
        count = int(out_degrees.sum())
        sources.append(np.repeat(np.arange(n_nodes), out_degrees))
        targets.append(rng.integers(0, n_nodes, size=count))
        classes.append(np.full(count, edge_class))
    return TypedDigraph(
        node_count=n_nodes,
        n_classes=len(lam),
        src=np.concatenate(sources),
        dst=np.concatenate(targets),
        cls=np.concatenate(classes),
    )


def occupy_sample(
    g: TypedDigraph, p: Sequence[float], rng: np.random.Generator
) -> TypedDigraph:
    """Keep each edge independently with its class probability."""
    p = validate_probabilities(p, g.n_classes)
    keep = rng.random(g.edge_count) < p[g.cls]
    return TypedDigraph(
        node_count=g.node_count,
        n_classes=g.n_classes,
        src=g.src[keep],
        dst=g.dst[keep],
        cls=g.cls[keep],
    )


def giant_cutoff(n_nodes: int) -> float:
    minimum = settings.NETPERCOLATE["GIANT_CUTOFF_MIN"]
    return max(minimum, n_nodes ** (2.0 / 3.0))


@shared_task
def run_trial(config: dict, trial: int) -> dict:
    """Generate, occupy and measure one graph; JSON-friendly result."""
    config = SimConfig(**config)
    n = config.n_nodes
    graph = generate_er(
        n, config.lam, trial_rng(config.seed, trial, GRAPH_STREAM)
    )
    occupied = occupy_sample(
        graph, config.p, trial_rng(config.seed, trial, OCCUPATION_STREAM)
    )
    decomposition = decompose(occupied)
    cutoff = giant_cutoff(n)

    # Anything reaching the giant component reaches all of it.
    giant = len(decomposition.gscc) > cutoff
    reaches_giant = np.zeros(n, dtype=bool)
    if giant:
        reaches_giant[list(decomposition.gscc | decomposition.gin)] = True

    def outbreak_size(node):
        if reaches_giant[node]:
            return None
        return len(reachable_nodes(occupied, int(node)))

    seed_rng = trial_rng(config.seed, trial, SEED_STREAM)
    sizes = [
        outbreak_size(node)
        for node in seed_rng.integers(0, n, size=config.seeds_per_graph)
    ]
    small = [size for size in sizes if size is not None and size <= cutoff]
    measured = [size for size in sizes if size is not None]
    if len(measured) < len(sizes):
        # a giant outbreak covers at least GSCC and GOUT
        measured.append(len(decomposition.gscc) + len(decomposition.gout))

    by_class = []
    for edge_class in range(config.n_classes):
        heads = occupied.dst[occupied.cls == edge_class]
        if not len(heads) or not config.edge_seeds_per_class:
            by_class.append(None)
            continue
        picks = seed_rng.choice(heads, size=config.edge_seeds_per_class)
        class_sizes = [outbreak_size(node) for node in picks]
        class_small = [
            size
            for size in class_sizes
            if size is not None and size <= cutoff
        ]
        by_class.append(float(np.mean(class_small)) if class_small else None)

    result = TrialResult(
        trial=trial,
        gscc=len(decomposition.gscc),
        gin=len(decomposition.gin),
        gout=len(decomposition.gout),
        giant=giant,
        mean_small_outbreak=float(np.mean(small)) if small else None,
        small_outbreaks=len(small),
        max_outbreak=max(measured),
        mean_small_outbreak_by_class=tuple(by_class),
    )
    logger.debug("trial %d: %s", trial, result)
    return {
        **asdict(result),
        "mean_small_outbreak_by_class": list(by_class),
    }


def estimate(config: SimConfig) -> SimEstimates:
    """Monte Carlo estimates over config.trials independent graphs.

    Trials are celery tasks with their own random streams, so the result
    does not depend on how many workers run them or in which order.
    """
    logger.info(
        "simulating %d graphs of %d nodes, lam=%s p=%s",
        config.trials,
        config.n_nodes,
        config.lam,
        config.p,
    )
    payload = config.as_dict()
    results = (
        group(run_trial.s(payload, trial) for trial in range(config.trials))
        .apply_async()
        .get()
    )
    trials = tuple(
        TrialResult(
            **{
                **result,
                "mean_small_outbreak_by_class": tuple(
                    result["mean_small_outbreak_by_class"]
                ),
            }
        )
        for result in sorted(results, key=lambda result: result["trial"])
    )

    n = config.n_nodes
    estimates = SimEstimates(
        mean_outbreak=_estimate([t.mean_small_outbreak for t in trials]),
        p_ep_hat=_estimate([_share(t, t.gin, n) for t in trials]),
        f_hat=_estimate([_share(t, t.gout, n) for t in trials]),
        n_graphs=len(trials),
        mean_outbreak_by_class=tuple(
            _estimate([t.mean_small_outbreak_by_class[i] for t in trials])
            for i in range(config.n_classes)
        ),
        trials=trials,
    )
    logger.info(
        "P_ep~%s f~%s E[S]~%s",
        estimates.p_ep_hat.value,
        estimates.f_hat.value,
        estimates.mean_outbreak.value,
    )
    return estimates


def _estimate(samples: Sequence[float | None]) -> Estimate:
    """Across-graph mean and its standard error; missing samples skipped."""
    values = np.array([value for value in samples if value is not None])
    if not len(values):
        return Estimate(value=None, standard_error=None, samples=0)
    if len(values) == 1:
        return Estimate(float(values[0]), 0.0, 1)
    return Estimate(
        value=float(values.mean()),
        standard_error=float(values.std(ddof=1) / np.sqrt(len(values))),
        samples=len(values),
    )


def _share(trial: TrialResult, side: int, n_nodes: int) -> float:
    """Fraction of nodes in the giant SCC plus one side of the bow tie."""
    if not trial.giant:
        return 0.0
    return (trial.gscc + side) / n_nodes
