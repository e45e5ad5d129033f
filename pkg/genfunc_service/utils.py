from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial

from config.exceptions import DegenerateClassError, DomainError
from degree_service.models import Direction, JointDegreeDistribution
from degree_service.utils import marginal, validate_probabilities
from genfunc_service.models import (
    EvalPoint,
    GenFunc,
    PoissonKernel,
    Shift,
    TableKernel,
)


def from_distribution(dist: JointDegreeDistribution) -> GenFunc:
    return GenFunc(TableKernel(dist), Shift.identity(dist.n_classes))


def from_poisson(lam: Sequence[float]) -> GenFunc:
    kernel = PoissonKernel(tuple(lam))
    return GenFunc(kernel, Shift.identity(kernel.n_classes))


def evaluate(f: GenFunc, pt: EvalPoint) -> float:
    _check_point(f, pt)
    x, y = f.shift.apply(pt)
    return f.kernel.value(x, y)


def partial(
    f: GenFunc, direction: Direction, edge_class: int, pt: EvalPoint
) -> float:
    """Exact first partial derivative in x_i (IN) or y_i (OUT)."""
    _check_point(f, pt)
    _check_class(f, edge_class)
    x, y = f.shift.apply(pt)
    return f.shift.scale(direction, edge_class) * f.kernel.partial(
        direction, edge_class, x, y
    )


def excess(f: GenFunc, edge_class: int) -> GenFunc:
    """What remains of a node reached along a class-i edge.

    d/dx_i f = scale_i * c * K'(shift(x)) with K' normalized and shift fixing
    the all-ones point, so the normalized derivative is K' under the same
    shift.
    """
    _check_class(f, edge_class)
    if f.shift.scale(Direction.IN, edge_class) == 0.0:
        raise DegenerateClassError(edge_class)
    _, derived = f.kernel.derivative(Direction.IN, edge_class)
    return GenFunc(derived, f.shift)


def occupy(f: GenFunc, p: Sequence[float]) -> GenFunc:
    """Substitute x_i <- 1 - p_i + p_i x_i and y_i <- 1 - p_i + p_i y_i."""
    p = validate_probabilities(p, f.n_classes)
    return GenFunc(f.kernel, f.shift.then_occupy(p))


def dual(f: GenFunc) -> GenFunc:
    """Generating function of the reversed network: x and y blocks swapped."""
    return GenFunc(f.kernel.swapped(), f.shift.swapped())


def is_symmetric(f: GenFunc) -> bool:
    return f.shift.x_scale == f.shift.y_scale and f.kernel.is_symmetric()


def power_coefficients(
    dist: JointDegreeDistribution, edge_class: int, m: int
) -> np.ndarray:
    """Coefficients of g^m, g generating the class-i out-degree.

    g^m generates the total out-degree of m independent nodes.
    """
    if m < 0:
        raise DomainError("the power must be nonnegative")
    return polynomial.polypow(marginal(dist, Direction.OUT, edge_class), m)


def _check_point(f: GenFunc, pt: EvalPoint) -> None:
    if pt.n_classes != f.n_classes:
        raise DomainError(
            f"point has {pt.n_classes} classes, function has {f.n_classes}"
        )


def _check_class(f: GenFunc, edge_class: int) -> None:
    if not 0 <= edge_class < f.n_classes:
        raise DomainError(
            f"edge class {edge_class} out of range for {f.n_classes} classes"
        )
