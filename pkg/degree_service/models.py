from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Mapping

import numpy as np
from django.db import models

from config.exceptions import DomainError

MAX_CLASSES = 8
NORMALIZATION_TOLERANCE = 1e-12


class Direction(models.TextChoices):
    IN = "in", "Incoming edges"
    OUT = "out", "Outgoing edges"


@dataclass(frozen=True, order=True)
class DegreeVector:
    in_by_class: tuple[int, ...]
    out_by_class: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "in_by_class", tuple(map(int, self.in_by_class))
        )
        object.__setattr__(
            self, "out_by_class", tuple(map(int, self.out_by_class))
        )
        if len(self.in_by_class) != len(self.out_by_class):
            raise DomainError("in and out degree vectors differ in length")
        if min(self.in_by_class + self.out_by_class, default=0) < 0:
            raise DomainError("degrees must be nonnegative")

    @property
    def n_classes(self) -> int:
        return len(self.in_by_class)

    def by_direction(self, direction: Direction) -> tuple[int, ...]:
        if direction == Direction.IN:
            return self.in_by_class
        return self.out_by_class

    def swapped(self) -> "DegreeVector":
        return DegreeVector(self.out_by_class, self.in_by_class)


@dataclass(frozen=True, eq=False)
class JointDegreeDistribution:
    """Sparse joint law of per-class in/out degrees, P(j, k)."""

    n_classes: int
    table: Mapping[DegreeVector, float] = field(repr=False)

    def __post_init__(self):
        if not 1 <= self.n_classes <= MAX_CLASSES:
            raise DomainError(
                f"between 1 and {MAX_CLASSES} edge classes are supported, "
                f"got {self.n_classes}"
            )
        if not self.table:
            raise DomainError("a distribution needs at least one entry")
        for vector, probability in self.table.items():
            if vector.n_classes != self.n_classes:
                raise DomainError(
                    f"degree vector {vector} does not have "
                    f"{self.n_classes} classes"
                )
            if not 0.0 <= probability <= 1.0:
                raise DomainError(f"probability {probability} outside [0, 1]")
        total = sum(self.table.values())
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise DomainError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(
            self, "table", MappingProxyType(dict(sorted(self.table.items())))
        )

    def __eq__(self, other):
        if not isinstance(other, JointDegreeDistribution):
            return NotImplemented
        return self.n_classes == other.n_classes and dict(self.table) == dict(
            other.table
        )

    def __len__(self):
        return len(self.table)

    @cached_property
    def in_degrees(self) -> np.ndarray:
        return self._matrix(Direction.IN)

    @cached_property
    def out_degrees(self) -> np.ndarray:
        return self._matrix(Direction.OUT)

    @cached_property
    def probabilities(self) -> np.ndarray:
        array = np.fromiter(self.table.values(), dtype=float, count=len(self))
        array.setflags(write=False)
        return array

    def degrees(self, direction: Direction) -> np.ndarray:
        if direction == Direction.IN:
            return self.in_degrees
        return self.out_degrees

    def swapped(self) -> "JointDegreeDistribution":
        return JointDegreeDistribution(
            self.n_classes,
            {vector.swapped(): p for vector, p in self.table.items()},
        )

    def _matrix(self, direction: Direction) -> np.ndarray:
        array = np.array(
            [vector.by_direction(direction) for vector in self.table],
            dtype=np.int64,
        ).reshape(len(self), self.n_classes)
        array.setflags(write=False)
        return array


@dataclass(frozen=True)
class DegreeStats:
    z_by_class: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "z_by_class", tuple(map(float, self.z_by_class))
        )
        if min(self.z_by_class, default=0.0) < 0:
            raise DomainError("mean degrees must be nonnegative")

    @property
    def n_classes(self) -> int:
        return len(self.z_by_class)
