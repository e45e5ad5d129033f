from dataclasses import asdict, dataclass, field

from config.exceptions import DomainError

MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class SimConfig:
    n_nodes: int
    lam: tuple[float, ...]
    p: tuple[float, ...]
    trials: int
    seed: int
    seeds_per_graph: int = 1000
    edge_seeds_per_class: int = 200

    def __post_init__(self):
        object.__setattr__(self, "lam", tuple(map(float, self.lam)))
        object.__setattr__(self, "p", tuple(map(float, self.p)))
        if self.n_nodes < 1:
            raise DomainError("a simulated graph needs at least one node")
        if not self.lam or len(self.lam) != len(self.p):
            raise DomainError("lam and p must have one entry per class")
        if min(self.lam) < 0.0:
            raise DomainError("mean degrees must be nonnegative")
        if not all(0.0 <= p_i <= 1.0 for p_i in self.p):
            raise DomainError("occupation probabilities must lie in [0, 1]")
        if self.trials < 1:
            raise DomainError("at least one trial is needed")
        if not 0 <= self.seed <= MAX_SEED:
            raise DomainError("the seed is an unsigned 64-bit integer")
        if self.seeds_per_graph < 1 or self.edge_seeds_per_class < 0:
            raise DomainError("seed counts must be positive")

    @property
    def n_classes(self) -> int:
        return len(self.lam)

    def as_dict(self) -> dict:
        return {
            **asdict(self),
            "lam": list(self.lam),
            "p": list(self.p),
        }


@dataclass(frozen=True)
class TrialResult:
    """What one generated-and-occupied graph contributed."""

    trial: int
    gscc: int
    gin: int
    gout: int
    giant: bool
    mean_small_outbreak: float | None
    small_outbreaks: int
    max_outbreak: int
    mean_small_outbreak_by_class: tuple[float | None, ...] = ()


@dataclass(frozen=True)
class Estimate:
    value: float | None
    standard_error: float | None
    samples: int


@dataclass(frozen=True)
class SimEstimates:
    mean_outbreak: Estimate
    p_ep_hat: Estimate
    f_hat: Estimate
    n_graphs: int
    mean_outbreak_by_class: tuple[Estimate, ...] = ()
    trials: tuple[TrialResult, ...] = field(default=(), repr=False)
