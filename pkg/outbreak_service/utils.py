import logging
import warnings
from typing import Sequence

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from config.exceptions import DegenerateClassError, DomainError, NumericError
from degree_service.models import Direction
from degree_service.utils import validate_probabilities
from genfunc_service.models import EvalPoint, GenFunc
from genfunc_service.utils import evaluate, excess, occupy, partial
from outbreak_service.models import OutbreakReport, OutbreakSystem

logger = logging.getLogger(__name__)

# A branching matrix whose spectral radius is within this of 1 or above
# counts as supercritical.
CRITICALITY_TOLERANCE = 1e-9
CONDITION_LIMIT = 1e12
NORMALIZATION_TOLERANCE = 1e-12


def excess_functions(g0: GenFunc) -> list[GenFunc]:
    """H_i for every class; a class without edges cannot be analyzed."""
    return [excess(g0, edge_class) for edge_class in range(g0.n_classes)]


def build_system(
    excess_fns: Sequence[GenFunc], p: Sequence[float]
) -> OutbreakSystem:
    n = len(excess_fns)
    p = validate_probabilities(p, n)
    ones = EvalPoint.ones(n)

    derivatives = np.empty((n, n))
    for i, h in enumerate(excess_fns):
        if abs(evaluate(h, ones) - 1.0) > NORMALIZATION_TOLERANCE:
            raise DegenerateClassError(i)
        for j in range(n):
            derivatives[i, j] = partial(h, Direction.OUT, j, ones)

    a = np.eye(n) - derivatives * p[np.newaxis, :]
    with warnings.catch_warnings():
        # A singular matrix is a legitimate (critical) outcome here.
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, pivots = lu_factor(a)
    swaps = np.count_nonzero(pivots != np.arange(n))
    det_a = float((-1.0) ** swaps * np.prod(np.diag(lu)))

    logger.debug("outbreak system a=%s det=%r", a.tolist(), det_a)
    return OutbreakSystem(
        a=a, b=np.ones(n), det_a=det_a, lu=lu, pivots=pivots
    )


def criticality(sys: OutbreakSystem) -> bool:
    """True while outbreaks stay finite.

    That needs a to be a nonsingular M-matrix, i.e. the branching matrix
    I - a must have spectral radius below 1. A positive det(a) alone is
    not enough once there are two or more classes: two decoupled
    supercritical layers give a positive determinant.
    """
    return sys.spectral_radius < 1.0 - CRITICALITY_TOLERANCE


def solve(sys: OutbreakSystem, rhs: Sequence[float]) -> np.ndarray:
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != sys.b.shape:
        raise DomainError(
            f"right-hand side needs {sys.n_classes} entries, got {rhs.shape}"
        )
    return lu_solve((sys.lu, sys.pivots), rhs)


def expected_sizes(
    sys: OutbreakSystem, occupied_g: GenFunc, p: Sequence[float]
) -> OutbreakReport:
    validate_probabilities(p, sys.n_classes)
    if occupied_g.n_classes != sys.n_classes:
        raise DomainError("system and generating function class counts differ")

    radius = sys.spectral_radius
    if not criticality(sys):
        logger.info(
            "det(A)=%r, spectral radius %r: supercritical, no finite mean",
            sys.det_a,
            radius,
        )
        return OutbreakReport(
            det_a=sys.det_a, supercritical=True, spectral_radius=radius
        )

    condition = float(np.linalg.cond(sys.a))
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise NumericError(
            "outbreak system is too ill-conditioned to solve", condition
        )

    by_class = solve(sys, sys.b)
    ones = EvalPoint.ones(sys.n_classes)
    out_degrees = np.array(
        [
            partial(occupied_g, Direction.OUT, j, ones)
            for j in range(sys.n_classes)
        ]
    )
    e_s_node = 1.0 + float(out_degrees @ by_class)

    logger.info("det(A)=%r: E[S]=%r, E[S_i]=%s", sys.det_a, e_s_node, by_class)
    return OutbreakReport(
        det_a=sys.det_a,
        supercritical=False,
        e_s_by_class=tuple(float(value) for value in by_class),
        e_s_node=e_s_node,
        spectral_radius=radius,
    )


def analyze_outbreak(
    g0: GenFunc, p: Sequence[float]
) -> tuple[OutbreakReport, GenFunc]:
    """Finite-outbreak report for the unoccupied function g0 under p."""
    system = build_system(excess_functions(g0), p)
    occupied_g = occupy(g0, p)
    return expected_sizes(system, occupied_g, p), occupied_g
