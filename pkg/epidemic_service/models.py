from dataclasses import dataclass

import numpy as np

from config.exceptions import DomainError


@dataclass(frozen=True)
class FixedPointResult:
    h: tuple[float, ...]
    iterations: int
    residual: float
    converged: bool

    @classmethod
    def trivial(cls, n_classes: int) -> "FixedPointResult":
        """The fixed point h = 1 every system admits; finite outbreaks only."""
        return cls(
            (1.0,) * n_classes, iterations=0, residual=0.0, converged=True
        )


@dataclass(frozen=True)
class EpidemicReport:
    p_ep: float
    f: float
    h_forward: FixedPointResult
    h_dual: FixedPointResult

    @property
    def converged(self) -> bool:
        return self.h_forward.converged and self.h_dual.converged

    @property
    def iterations(self) -> int:
        return max(self.h_forward.iterations, self.h_dual.iterations)


@dataclass(frozen=True)
class ERParams:
    """Erdos-Renyi input: class-i mean degree lam_i, occupation p_i."""

    lam: tuple[float, ...]
    p: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lam", tuple(map(float, self.lam)))
        object.__setattr__(self, "p", tuple(map(float, self.p)))
        if len(self.lam) != len(self.p):
            raise DomainError("lam and p must have one entry per class")
        if min(self.lam, default=0.0) < 0.0:
            raise DomainError("mean degrees must be nonnegative")
        if not all(0.0 <= p_i <= 1.0 for p_i in self.p):
            raise DomainError("occupation probabilities must lie in [0, 1]")

    @property
    def s(self) -> float:
        """Mean number of occupied out-edges; the epidemic threshold is 1."""
        return float(np.dot(self.lam, self.p))
