"""Birth-and-death model specifications and reference rate functions.

Five regimes are supported.  All of them propose births from a homogeneous
Poisson stream of intensity ``birth_intensity``; they differ in how births
are thinned and how points die:

* ``free``: every proposal establishes, nothing dies.
* ``global_regulation``: every proposal establishes; each point dies at the
  constant rate ``mortality``.
* ``establishment``: a proposal at x establishes with probability
  exp(-sum_y phi(x - y)) where phi is the establishment potential; nothing
  dies.
* ``competition``: every proposal establishes; a point x dies at rate
  sum_{y != x} a(x - y) where a is the competition kernel.
* ``glauber``: establishment thinning plus constant mortality.

The functions in this module evaluate rates directly from a configuration.
The simulator keeps incrementally updated caches instead; tests hold the two
routes against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .errors import ContractViolationError, ScenarioError
from .geometry import CellGrid, Configuration, TorusWindow, pairwise_distances
from .kernels import DEFAULT_RANGE_TOLERANCE, Kernel

__all__ = [
    "Regime",
    "ModelSpec",
    "birth_proposal_rate",
    "birth_acceptance",
    "death_rate",
    "energy",
]


class Regime(str, Enum):
    FREE = "free"
    GLOBAL_REGULATION = "global_regulation"
    ESTABLISHMENT = "establishment"
    COMPETITION = "competition"
    GLAUBER = "glauber"


_NEEDS_MORTALITY = {Regime.GLOBAL_REGULATION, Regime.GLAUBER}
_NEEDS_POTENTIAL = {Regime.ESTABLISHMENT, Regime.GLAUBER}
_NEEDS_COMPETITION = {Regime.COMPETITION}


@dataclass(frozen=True)
class ModelSpec:
    """A regime tag plus the parameters that regime requires.

    Parameters not used by the regime may be left as None; supplying them is
    harmless but they are ignored by the dynamics.
    """

    regime: Regime
    birth_intensity: float
    mortality: float | None = None
    establishment_potential: Kernel | None = None
    competition_kernel: Kernel | None = None

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime(self.regime))
        if not math.isfinite(self.birth_intensity) or self.birth_intensity <= 0:
            raise ScenarioError(f"birth intensity must be positive, got {self.birth_intensity}")
        if self.regime in _NEEDS_MORTALITY:
            if self.mortality is None or not math.isfinite(self.mortality) or self.mortality <= 0:
                raise ScenarioError(
                    f"regime {self.regime.value} needs a positive mortality, got {self.mortality}"
                )
        if self.regime in _NEEDS_POTENTIAL and self.establishment_potential is None:
            raise ScenarioError(f"regime {self.regime.value} needs an establishment potential")
        if self.regime in _NEEDS_COMPETITION and self.competition_kernel is None:
            raise ScenarioError(f"regime {self.regime.value} needs a competition kernel")

    @cached_property
    def potential_range(self) -> float:
        """Support radius of the establishment potential (0 when unused)."""
        if self.regime in _NEEDS_POTENTIAL:
            return self.establishment_potential.effective_range(DEFAULT_RANGE_TOLERANCE)
        return 0.0

    @cached_property
    def competition_range(self) -> float:
        """Support radius of the competition kernel (0 when unused)."""
        if self.regime in _NEEDS_COMPETITION:
            return self.competition_kernel.effective_range(DEFAULT_RANGE_TOLERANCE)
        return 0.0

    @property
    def interaction_range(self) -> float:
        """Largest neighbour-search radius the dynamics needs."""
        return max(self.potential_range, self.competition_range)

    def kernels_in_use(self) -> list[Kernel]:
        out = []
        if self.regime in _NEEDS_POTENTIAL:
            out.append(self.establishment_potential)
        if self.regime in _NEEDS_COMPETITION:
            out.append(self.competition_kernel)
        return out


def birth_proposal_rate(model: ModelSpec, window: TorusWindow) -> float:
    """Total rate of the dominating uniform birth proposal stream."""
    return model.birth_intensity * window.volume


def birth_acceptance(model: ModelSpec, x, grid: CellGrid) -> float:
    """Probability that a proposal at x establishes, given the current points.

    Hits exp(-sum phi) for establishment-type regimes and 1 otherwise.  The
    grid must have been built with a cutoff at least the potential's range.
    """
    if model.regime not in _NEEDS_POTENTIAL:
        return 1.0
    phi = model.establishment_potential
    total = 0.0
    for _, dist in grid.neighbors_with_distances(x, model.potential_range):
        total += phi.profile(dist)
    return math.exp(-total)


def death_rate(model: ModelSpec, pid: int, grid: CellGrid) -> float:
    """Death rate of the point with id ``pid`` in the current configuration."""
    if pid not in grid:
        raise ContractViolationError(f"point id {pid} is not in the configuration")
    if model.regime in _NEEDS_MORTALITY:
        return float(model.mortality)
    if model.regime in _NEEDS_COMPETITION:
        a = model.competition_kernel
        pos = grid.position(pid)
        total = 0.0
        for _, dist in grid.neighbors_with_distances(pos, model.competition_range, exclude=pid):
            total += a.profile(dist)
        return total
    return 0.0


def energy(kernel: Kernel, cfg: Configuration, window: TorusWindow) -> float:
    """Pair energy sum_{unordered pairs {x,y}} kernel(x - y) under the torus metric.

    For the competition regime, twice this value equals the sum of all death
    rates.
    """
    if len(cfg) < 2:
        return 0.0
    dists = pairwise_distances(window, cfg.positions)
    return float(np.sum(kernel.profile_array(dists)))
