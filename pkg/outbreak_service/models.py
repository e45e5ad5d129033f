from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class OutbreakSystem:
    """Linear system a h' = b for the expected outbreak sizes E[S_i].

    a_ij = delta_ij - p_j dH_i/dy_j at the all-ones point; the LU factors
    are kept so the system is factored once.
    """

    a: np.ndarray
    b: np.ndarray
    det_a: float
    lu: np.ndarray = field(repr=False)
    pivots: np.ndarray = field(repr=False)

    @property
    def n_classes(self) -> int:
        return len(self.b)

    @property
    def spectral_radius(self) -> float:
        """Perron root of the occupied branching matrix I - a."""
        branching = np.eye(self.n_classes) - self.a
        return float(np.max(np.abs(np.linalg.eigvals(branching))))


@dataclass(frozen=True)
class OutbreakReport:
    det_a: float
    supercritical: bool
    e_s_by_class: tuple[float, ...] | None = None
    e_s_node: float | None = None
    # not serialized; the epidemic solver reads it to spot the threshold
    spectral_radius: float | None = None
