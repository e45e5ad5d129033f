import logging
import math
import sys
from typing import Callable, Sequence

import numpy as np

from config.exceptions import ConvergenceError, DomainError
from degree_service.models import DegreeStats, Direction
from degree_service.utils import empirical_distribution
from epidemic_service.models import EpidemicReport, ERParams, FixedPointResult
from genfunc_service.models import EvalPoint, GenFunc, PoissonKernel
from genfunc_service.utils import (
    evaluate,
    from_distribution,
    is_symmetric,
    partial,
)
from graph_service.models import TypedDigraph
from graph_service.utils import split_edge
from outbreak_service.models import OutbreakReport
from outbreak_service.utils import CRITICALITY_TOLERANCE, analyze_outbreak

logger = logging.getLogger(__name__)

FIXED_POINT_TOLERANCE = 1e-12
MAX_ITERATIONS = 10**6

BRANCH_POINT = -math.exp(-1.0)
HALLEY_MAX_ITERATIONS = 100
# Below this the branch-point series is exact to double precision.
SERIES_ONLY_BELOW = 1e-3


def solve_dual_fixed_point(
    occupied_g: GenFunc, z: DegreeStats
) -> FixedPointResult:
    """Least solution of H^d_i = dG/dy_i(H^d; 1) / z_i in [0, 1]^n."""
    ones = np.ones(occupied_g.n_classes)

    def derivative(edge_class, h):
        return partial(
            occupied_g, Direction.OUT, edge_class, EvalPoint(h, ones)
        )

    return _least_fixed_point(derivative, z)


def solve_forward_fixed_point(
    occupied_g: GenFunc, z: DegreeStats
) -> FixedPointResult:
    """Least solution of H_i = dG/dx_i(1; H) / z_i in [0, 1]^n."""
    ones = np.ones(occupied_g.n_classes)

    def derivative(edge_class, h):
        return partial(
            occupied_g, Direction.IN, edge_class, EvalPoint(ones, h)
        )

    return _least_fixed_point(derivative, z)


def epidemic_report(
    occupied_g: GenFunc, z: DegreeStats, outbreak: OutbreakReport
) -> EpidemicReport:
    n = occupied_g.n_classes
    if not outbreak.supercritical or _at_threshold(outbreak):
        trivial = FixedPointResult.trivial(n)
        return EpidemicReport(
            p_ep=0.0, f=0.0, h_forward=trivial, h_dual=trivial
        )

    h_dual = solve_dual_fixed_point(occupied_g, z)
    if is_symmetric(occupied_g):
        h_forward = h_dual
    else:
        h_forward = solve_forward_fixed_point(occupied_g, z)

    ones = (1.0,) * n
    p_ep = 1.0 - evaluate(occupied_g, EvalPoint(ones, _clip(h_forward.h)))
    f = 1.0 - evaluate(occupied_g, EvalPoint(_clip(h_dual.h), ones))
    report = EpidemicReport(
        p_ep=_unit(p_ep), f=_unit(f), h_forward=h_forward, h_dual=h_dual
    )
    logger.info(
        "epidemic: P_ep=%r f=%r after %d iterations",
        report.p_ep,
        report.f,
        report.iterations,
    )
    return report


def analyze(
    g0: GenFunc, p: Sequence[float]
) -> tuple[OutbreakReport, EpidemicReport]:
    """Both reports for the unoccupied function g0 under occupation p."""
    outbreak, occupied_g = analyze_outbreak(g0, p)
    ones = EvalPoint.ones(g0.n_classes)
    z = DegreeStats(
        tuple(
            partial(occupied_g, Direction.IN, edge_class, ones)
            for edge_class in range(g0.n_classes)
        )
    )
    return outbreak, epidemic_report(occupied_g, z, outbreak)


def er_closed_form(params: ERParams) -> EpidemicReport:
    n = len(params.lam)
    s = params.s
    if s <= 1.0:
        trivial = FixedPointResult.trivial(n)
        return EpidemicReport(
            p_ep=0.0, f=0.0, h_forward=trivial, h_dual=trivial
        )

    h = -lambert_w0(-s * math.exp(-s)) / s
    residual = abs(h - math.exp(s * (h - 1.0)))
    solution = FixedPointResult(
        (h,) * n, iterations=0, residual=residual, converged=True
    )
    return EpidemicReport(
        p_ep=1.0 - h, f=1.0 - h, h_forward=solution, h_dual=solution
    )


def er_params_from_network_size(
    network_size: int, q: Sequence[float], p: Sequence[float]
) -> ERParams:
    kernel = PoissonKernel.from_network_size(network_size, q)
    return ERParams(kernel.lam, tuple(p))


def lambert_w0(z: float) -> float:
    """Principal branch of the Lambert W function for real z >= -1/e.

    Halley iteration seeded by the branch-point series near -1/e and by
    log(z) - log(log(z)) further out; bisection on [-1, 0] backs it up for
    negative z.
    """
    if math.isnan(z) or z < BRANCH_POINT - sys.float_info.epsilon:
        raise DomainError(f"W0 is real only for z >= -1/e, got {z}")
    if z == 0.0:
        return 0.0

    q = 2.0 * (1.0 + math.e * z)
    if q <= 4.0 * sys.float_info.epsilon:
        # z is -1/e up to rounding
        return -1.0
    root = math.sqrt(q)
    if root < SERIES_ONLY_BELOW:
        return _branch_series(root)

    if z < 1.5:
        w = root - 1.0
    else:
        log_z = math.log(z)
        w = log_z - math.log(log_z)

    for _ in range(HALLEY_MAX_ITERATIONS):
        exp_w = math.exp(w)
        error = w * exp_w - z
        w_plus_one = w + 1.0
        step = error / (
            exp_w * w_plus_one - (w + 2.0) * error / (2.0 * w_plus_one)
        )
        w -= step
        if abs(step) < 0.7e-16 * (2.0 + abs(w)):
            break

    if z < 0.0 and not (-1.0 <= w <= 0.0 and _w_residual_ok(w, z)):
        logger.debug("Halley failed for W0(%r), bisecting", z)
        w = _bisect_w0(z)
    return w


def edge_failure_epidemic(
    g: TypedDigraph, edge_index: int, p: Sequence[float]
) -> EpidemicReport:
    """Epidemic report for the graph with one edge replaced by a node."""
    split, new_node = split_edge(g, edge_index)
    logger.info("edge %d split through node %d", edge_index, new_node)
    g0 = from_distribution(empirical_distribution(split))
    _, report = analyze(g0, p)
    return report


def _least_fixed_point(
    derivative: Callable[[int, np.ndarray], float], z: DegreeStats
) -> FixedPointResult:
    """Iterate h <- phi(h) from h = 0; phi is monotone on [0, 1]^n.

    Classes with z_i = 0 carry no occupied edges; their h_i stays at 1.
    """
    z_by_class = np.asarray(z.z_by_class)
    retained = np.flatnonzero(z_by_class > 0.0)
    h = np.ones(len(z_by_class))
    h[retained] = 0.0

    def phi(current):
        updated = current.copy()
        clipped = np.clip(current, 0.0, 1.0)
        for i in retained:
            updated[i] = derivative(i, clipped) / z_by_class[i]
        return updated

    residual = math.inf
    for iteration in range(MAX_ITERATIONS + 1):
        updated = phi(h)
        residual = float(np.max(np.abs(updated - h), initial=0.0))
        if residual <= FIXED_POINT_TOLERANCE:
            logger.debug(
                "fixed point after %d iterations, residual %.3e",
                iteration,
                residual,
            )
            return FixedPointResult(
                tuple(np.clip(h, 0.0, 1.0).tolist()),
                iterations=iteration,
                residual=residual,
                converged=True,
            )
        h = updated
    raise ConvergenceError(residual, MAX_ITERATIONS)


def _branch_series(root: float) -> float:
    # W0 around -1/e in powers of sqrt(2 (1 + e z))
    return (
        -1.0
        + root
        - root**2 / 3.0
        + 11.0 / 72.0 * root**3
        - 43.0 / 540.0 * root**4
        + 769.0 / 17280.0 * root**5
    )


def _w_residual_ok(w: float, z: float) -> bool:
    return abs(w * math.exp(w) - z) <= 1e-12 * max(1.0, abs(z))


def _bisect_w0(z: float) -> float:
    low, high = -1.0, 0.0
    while high - low > 4.0 * sys.float_info.epsilon:
        middle = 0.5 * (low + high)
        if middle * math.exp(middle) < z:
            low = middle
        else:
            high = middle
    return 0.5 * (low + high)


def _at_threshold(outbreak: OutbreakReport) -> bool:
    """Critical point: no giant component yet, and iteration stalls."""
    radius = outbreak.spectral_radius
    if radius is None:
        return abs(outbreak.det_a) <= CRITICALITY_TOLERANCE
    return radius <= 1.0 + CRITICALITY_TOLERANCE


def _clip(h: Sequence[float]) -> tuple[float, ...]:
    return tuple(min(1.0, max(0.0, value)) for value in h)


def _unit(value: float) -> float:
    return min(1.0, max(0.0, value))
