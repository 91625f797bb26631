"""Closed-form density laws and regulation bounds.

These are the analytic counterparts the simulator is checked against:

* the free density grows linearly, k0 + sigma * t;
* under constant mortality the density relaxes exponentially to sigma / m;
* establishment thinning admits a logarithmic lower envelope on the density;
* pairwise competition admits a quadratic energy lower bound (superstability)
  whose constant feeds a Riccati comparison argument, giving a uniform upper
  density bound D and an exponential second-order bound at short distances.

Everything here is deterministic and cheap; the simulator never calls into
this module, so the two sides stay independent routes to the same numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import KernelTooSpreadError, OutOfRegimeError, ScenarioError
from .geometry import Configuration, TorusWindow
from .kernels import Kernel
from .models import energy

__all__ = [
    "free_density",
    "global_reg_density",
    "establishment_lower_bound",
    "ball_family_f_constant",
    "FTypeParams",
    "f_type_bound",
    "SuperstabilityConstant",
    "superstability_constant",
    "check_superstability",
    "riccati_solution",
    "density_bound",
    "second_order_bound",
    "CompetitionBound",
    "derive_competition_bound",
    "SUPERSTABILITY_SLACK",
    "DENSITY_BOUND_MARGIN",
]

# Absolute slack absorbing roundoff when testing the energy inequality.
SUPERSTABILITY_SLACK = 1e-12

# Relative headroom keeping the Riccati start strictly above equilibrium.
DENSITY_BOUND_MARGIN = 0.05

GRID_POINTS_DEFAULT = 1000


def free_density(initial_density: float, birth_intensity: float, t) -> np.ndarray | float:
    """Density of the pure-birth system: initial_density + birth_intensity * t."""
    t = np.asarray(t, dtype=float)
    out = initial_density + birth_intensity * t
    return float(out) if out.ndim == 0 else out


def global_reg_density(
    initial_density: float, birth_intensity: float, mortality: float, t
) -> np.ndarray | float:
    """Density under constant per-point mortality.

    Solves dk/dt = birth_intensity - mortality * k, relaxing monotonically
    from the initial density to the invariant level birth_intensity/mortality.
    """
    if mortality <= 0:
        raise OutOfRegimeError(f"mortality must be positive, got {mortality}")
    t = np.asarray(t, dtype=float)
    decay = np.exp(-mortality * t)
    out = decay * initial_density + (birth_intensity / mortality) * (1.0 - decay)
    return float(out) if out.ndim == 0 else out


def establishment_lower_bound(
    initial_density: float, potential_mass: float, t
) -> np.ndarray | float:
    """Logarithmic lower envelope for the establishment regime at unit birth
    intensity.

    Solves dg/dt = exp(-potential_mass * g); for other birth intensities
    rescale time by the intensity before calling.
    """
    if potential_mass <= 0:
        raise OutOfRegimeError(f"potential mass must be positive, got {potential_mass}")
    t = np.asarray(t, dtype=float)
    out = np.log(potential_mass * t + math.exp(initial_density * potential_mass)) / potential_mass
    return float(out) if out.ndim == 0 else out


def ball_family_f_constant(dimension: int) -> float:
    """Shell-to-volume constant for the growing-ball window family: 2^d - 1."""
    if dimension < 1:
        raise ScenarioError(f"dimension must be positive, got {dimension}")
    return 2.0**dimension - 1.0


@dataclass(frozen=True)
class FTypeParams:
    """A shell-to-volume constant together with where it came from."""

    f_constant: float
    provenance: str  # "ball-formula" or "user-supplied"


def f_type_bound(dimension: int | None = None, f_constant: float | None = None) -> FTypeParams:
    """Resolve the window-family constant used by the superstability bound.

    Either pass a dimension to use the ball-family formula, or supply the
    constant directly for other window families.
    """
    if f_constant is not None:
        if not math.isfinite(f_constant) or f_constant <= 0:
            raise ScenarioError(f"f constant must be positive and finite, got {f_constant}")
        return FTypeParams(float(f_constant), "user-supplied")
    if dimension is None:
        raise ScenarioError("need a dimension or an explicit f constant")
    return FTypeParams(ball_family_f_constant(dimension), "ball-formula")


@dataclass(frozen=True)
class SuperstabilityConstant:
    """Best constant found on the cutoff grid, with the cutoff that won."""

    value: float       # c in  2 * energy >= c * n^2 / volume
    cutoff: float      # tail cutoff h at which the maximum was attained
    kernel_mass: float
    tail_at_cutoff: float


def superstability_constant(
    kernel: Kernel,
    f_constant: float,
    grid_points: int = GRID_POINTS_DEFAULT,
) -> SuperstabilityConstant:
    """Maximize the quadratic energy constant over a tail cutoff grid.

    For each cutoff h in (0, 1) the candidate constant is

        (mass - tail(h))^2 / (tail(h) + (F + 1) * mass)

    restricted to cutoffs where the retained mass is positive.  The grid is
    uniform with ``grid_points`` interior points; ties go to the smallest
    cutoff.  Raises when no cutoff retains positive mass.
    """
    if f_constant <= 0 or not math.isfinite(f_constant):
        raise ScenarioError(f"f constant must be positive and finite, got {f_constant}")
    if grid_points < 1:
        raise ScenarioError(f"grid must have at least one point, got {grid_points}")
    mass = kernel.total_mass()
    best_value = -math.inf
    best = None
    for i in range(1, grid_points + 1):
        h = i / (grid_points + 1.0)
        tail = kernel.tail_mass(h)
        retained = mass - tail
        if retained <= 0.0:
            continue
        value = retained * retained / (tail + (f_constant + 1.0) * mass)
        if value > best_value:
            best_value = value
            best = (value, h, tail)
    if best is None:
        raise KernelTooSpreadError(
            "no cutoff below 1 keeps the kernel mass ahead of its tail; "
            "the quadratic energy bound degenerates for this kernel"
        )
    value, cutoff, tail = best
    return SuperstabilityConstant(
        value=value, cutoff=cutoff, kernel_mass=mass, tail_at_cutoff=tail
    )


def check_superstability(
    kernel: Kernel,
    constant: float,
    window: TorusWindow,
    cfg: Configuration,
    slack: float = SUPERSTABILITY_SLACK,
) -> bool:
    """Test 2 * energy(cfg) >= constant * n^2 / volume - slack on one
    configuration under the torus metric."""
    n = len(cfg)
    lhs = 2.0 * energy(kernel, cfg, window)
    rhs = constant * n * n / window.volume
    return lhs >= rhs - slack


def riccati_solution(source: float, damping: float, g0: float, t) -> np.ndarray | float:
    """Closed-form solution of dg/dt = source - damping * g^2 started above
    equilibrium.

    Requires g0 > sqrt(source / damping); the solution decreases
    monotonically to that equilibrium.
    """
    if source <= 0 or damping <= 0:
        raise OutOfRegimeError(f"source and damping must be positive, got {source}, {damping}")
    equilibrium = math.sqrt(source / damping)
    if g0 <= equilibrium:
        raise OutOfRegimeError(
            f"start value {g0} must exceed the equilibrium {equilibrium} for this branch"
        )
    ratio = g0 / equilibrium
    shift = 2.0 / (ratio - 1.0) + 1.0  # > 1
    t = np.asarray(t, dtype=float)
    out = equilibrium * (1.0 + 2.0 / (shift * np.exp(2.0 * math.sqrt(source * damping) * t) - 1.0))
    return float(out) if out.ndim == 0 else out


def density_bound(
    source: float,
    damping: float,
    initial_density: float,
    margin: float = DENSITY_BOUND_MARGIN,
) -> float:
    """Uniform-in-time density bound from the Riccati comparison.

    max(initial_density, (1 + margin) * sqrt(source / damping)); the margin
    keeps the comparison start strictly above equilibrium.
    """
    if source <= 0 or damping <= 0:
        raise OutOfRegimeError(f"source and damping must be positive, got {source}, {damping}")
    if margin <= 0:
        raise OutOfRegimeError(f"margin must be positive, got {margin}")
    return max(initial_density, (1.0 + margin) * math.sqrt(source / damping))


def second_order_bound(
    kernel_value: float,
    initial_pair_density: float,
    birth_intensity: float,
    bound_d: float,
    t,
) -> np.ndarray | float:
    """Short-distance bound on the second correlation function.

    At a separation where the competition kernel equals ``kernel_value`` > 0,

        k2_t <= exp(-2 a t) * k2_0 + (sigma D / a) * (1 - exp(-2 a t)),

    valid once the density is uniformly bounded by D.
    """
    if kernel_value <= 0:
        raise OutOfRegimeError(
            f"the bound only holds where the kernel is positive, got {kernel_value}"
        )
    t = np.asarray(t, dtype=float)
    decay = np.exp(-2.0 * kernel_value * t)
    out = decay * initial_pair_density + (
        birth_intensity * bound_d / kernel_value
    ) * (1.0 - decay)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CompetitionBound:
    """The derived bound package for a competition scenario."""

    constant: float        # superstability constant c
    cutoff: float          # tail cutoff attaining it
    kernel_mass: float
    tail_at_cutoff: float
    f_constant: float
    birth_intensity: float
    initial_density: float
    bound: float           # uniform density bound D
    margin: float

    @property
    def equilibrium(self) -> float:
        return math.sqrt(self.birth_intensity / self.constant)


def derive_competition_bound(
    kernel: Kernel,
    f_constant: float,
    birth_intensity: float,
    initial_density: float,
    margin: float = DENSITY_BOUND_MARGIN,
    grid_points: int = GRID_POINTS_DEFAULT,
) -> CompetitionBound:
    """Run the full chain kernel -> c -> D for a competition scenario."""
    sc = superstability_constant(kernel, f_constant, grid_points=grid_points)
    bound = density_bound(birth_intensity, sc.value, initial_density, margin=margin)
    return CompetitionBound(
        constant=sc.value,
        cutoff=sc.cutoff,
        kernel_mass=sc.kernel_mass,
        tail_at_cutoff=sc.tail_at_cutoff,
        f_constant=f_constant,
        birth_intensity=birth_intensity,
        initial_density=initial_density,
        bound=bound,
        margin=margin,
    )
