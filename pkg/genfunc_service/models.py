from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from config.exceptions import DegenerateClassError, DomainError
from degree_service.models import (
    DegreeVector,
    Direction,
    JointDegreeDistribution,
)


def _float_tuple(values) -> tuple[float, ...]:
    return tuple(float(value) for value in np.asarray(values).reshape(-1))


@dataclass(frozen=True)
class EvalPoint:
    """Arguments (x_1..x_n; y_1..y_n) of a generating function."""

    x: tuple[float, ...]
    y: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", _float_tuple(self.x))
        object.__setattr__(self, "y", _float_tuple(self.y))
        if len(self.x) != len(self.y):
            raise DomainError("x and y blocks differ in length")
        for value in self.x + self.y:
            if not 0.0 <= value <= 1.0:
                raise DomainError(
                    f"generating functions are evaluated on [0, 1], "
                    f"got {value}"
                )

    @classmethod
    def ones(cls, n_classes: int) -> "EvalPoint":
        return cls((1.0,) * n_classes, (1.0,) * n_classes)

    @property
    def n_classes(self) -> int:
        return len(self.x)


class Kernel(ABC):
    """Unshifted generating function in 2n variables."""

    n_classes: int

    @abstractmethod
    def value(self, x: np.ndarray, y: np.ndarray) -> float:
        ...

    @abstractmethod
    def partial(
        self,
        direction: Direction,
        edge_class: int,
        x: np.ndarray,
        y: np.ndarray,
    ) -> float:
        ...

    @abstractmethod
    def derivative(
        self, direction: Direction, edge_class: int
    ) -> tuple[float, "Kernel"]:
        """Split d/dx_i (or d/dy_i) into a constant times a normalized kernel.

        Raises DegenerateClassError when the constant, the mean class-i
        degree, is zero.
        """

    @abstractmethod
    def swapped(self) -> "Kernel":
        ...

    @abstractmethod
    def is_symmetric(self) -> bool:
        ...


@dataclass(frozen=True)
class TableKernel(Kernel):
    distribution: JointDegreeDistribution

    @property
    def n_classes(self) -> int:
        return self.distribution.n_classes

    def _monomials(self, x, y, in_degrees=None, out_degrees=None):
        if in_degrees is None:
            in_degrees = self.distribution.in_degrees
        if out_degrees is None:
            out_degrees = self.distribution.out_degrees
        return np.prod(np.power(x, in_degrees), axis=1) * np.prod(
            np.power(y, out_degrees), axis=1
        )

    def value(self, x, y):
        return float(self.distribution.probabilities @ self._monomials(x, y))

    def partial(self, direction, edge_class, x, y):
        degrees = self.distribution.degrees(direction)
        coefficients = degrees[:, edge_class]
        lowered = degrees.copy()
        lowered[:, edge_class] = np.maximum(coefficients - 1, 0)
        if direction == Direction.IN:
            monomials = self._monomials(x, y, in_degrees=lowered)
        else:
            monomials = self._monomials(x, y, out_degrees=lowered)
        return float(
            (self.distribution.probabilities * coefficients) @ monomials
        )

    def derivative(self, direction, edge_class):
        table = {}
        for vector, probability in self.distribution.table.items():
            degrees = list(vector.by_direction(direction))
            if degrees[edge_class] == 0:
                continue
            weight = probability * degrees[edge_class]
            degrees[edge_class] -= 1
            if direction == Direction.IN:
                lowered = DegreeVector(degrees, vector.out_by_class)
            else:
                lowered = DegreeVector(vector.in_by_class, degrees)
            table[lowered] = table.get(lowered, 0.0) + weight

        mean_degree = sum(table.values())
        if mean_degree <= 0.0:
            raise DegenerateClassError(edge_class)
        normalized = {
            vector: weight / mean_degree for vector, weight in table.items()
        }
        return mean_degree, TableKernel(
            JointDegreeDistribution(self.n_classes, normalized)
        )

    def swapped(self):
        return TableKernel(self.distribution.swapped())

    def is_symmetric(self):
        return self.distribution == self.distribution.swapped()


@dataclass(frozen=True)
class PoissonKernel(Kernel):
    """prod_i exp(lam_i (x_i + y_i - 2)): independent Poisson degrees."""

    lam: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lam", _float_tuple(self.lam))
        if not self.lam:
            raise DomainError("a Poisson kernel needs at least one class")
        if min(self.lam) < 0.0:
            raise DomainError(f"Poisson means must be nonnegative: {self.lam}")

    @classmethod
    def from_network_size(
        cls, network_size: int, q: Sequence[float]
    ) -> "PoissonKernel":
        """Edges of class i exist independently with probability q_i."""
        if network_size < 1:
            raise DomainError("network size must be positive")
        return cls(tuple(network_size * float(q_i) for q_i in q))

    @property
    def n_classes(self) -> int:
        return len(self.lam)

    def value(self, x, y):
        lam = np.asarray(self.lam)
        return float(np.exp(lam @ (x + y - 2.0)))

    def partial(self, direction, edge_class, x, y):
        return self.lam[edge_class] * self.value(x, y)

    def derivative(self, direction, edge_class):
        if self.lam[edge_class] <= 0.0:
            raise DegenerateClassError(edge_class)
        return self.lam[edge_class], self

    def swapped(self):
        return self

    def is_symmetric(self):
        return True


@dataclass(frozen=True)
class Shift:
    """Affine maps x_i <- offset_i + scale_i x_i (same form for y).

    Only maps fixing the all-ones point are representable, which keeps
    every shifted function normalized.
    """

    x_scale: tuple[float, ...]
    y_scale: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "x_scale", _float_tuple(self.x_scale))
        object.__setattr__(self, "y_scale", _float_tuple(self.y_scale))
        for scale in self.x_scale + self.y_scale:
            if not 0.0 <= scale <= 1.0:
                raise DomainError(f"shift scale {scale} outside [0, 1]")

    @classmethod
    def identity(cls, n_classes: int) -> "Shift":
        return cls((1.0,) * n_classes, (1.0,) * n_classes)

    @property
    def x_offset(self) -> np.ndarray:
        return 1.0 - np.asarray(self.x_scale)

    @property
    def y_offset(self) -> np.ndarray:
        return 1.0 - np.asarray(self.y_scale)

    def apply(self, point: EvalPoint) -> tuple[np.ndarray, np.ndarray]:
        x = self.x_offset + np.asarray(self.x_scale) * np.asarray(point.x)
        y = self.y_offset + np.asarray(self.y_scale) * np.asarray(point.y)
        return x, y

    def then_occupy(self, p: np.ndarray) -> "Shift":
        # offset + scale (1 - p + p x) = (1 - scale p) + (scale p) x
        return Shift(
            np.asarray(self.x_scale) * p, np.asarray(self.y_scale) * p
        )

    def swapped(self) -> "Shift":
        return Shift(self.y_scale, self.x_scale)

    def scale(self, direction: Direction, edge_class: int) -> float:
        if direction == Direction.IN:
            return self.x_scale[edge_class]
        return self.y_scale[edge_class]


@dataclass(frozen=True)
class GenFunc:
    kernel: Kernel
    shift: Shift

    def __post_init__(self):
        if len(self.shift.x_scale) != self.kernel.n_classes:
            raise DomainError("shift and kernel disagree on the class count")

    @property
    def n_classes(self) -> int:
        return self.kernel.n_classes
