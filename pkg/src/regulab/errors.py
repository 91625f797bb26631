"""Exception types shared across the package."""

from __future__ import annotations


class RegulabError(Exception):
    """Base class for all package errors."""


class InvalidKernelError(RegulabError, ValueError):
    """Kernel parameters are unusable (non-positive or non-finite mass, bad grid)."""


class ContractViolationError(RegulabError, ValueError):
    """A call broke a documented precondition (bad radius, unknown point id, bad bins)."""


class ScenarioError(RegulabError, ValueError):
    """A scenario file or scenario object failed validation."""


class KernelTooSpreadError(RegulabError, ValueError):
    """No tail cutoff keeps the kernel mass ahead of its tail; no positive
    superstability constant exists on the search grid."""


class OutOfRegimeError(RegulabError, ValueError):
    """Analytic formula evaluated outside the regime where it is valid."""


class ExplosionError(RegulabError, RuntimeError):
    """Population cap breached during simulation.

    Carries the simulation time of the breach and, when raised from an
    ensemble, the replica index.
    """

    def __init__(self, time_of_breach: float, population: int, replica: int | None = None):
        self.time_of_breach = float(time_of_breach)
        self.population = int(population)
        self.replica = replica
        where = "" if replica is None else f" in replica {replica}"
        super().__init__(
            f"population cap breached{where} at t={time_of_breach:.6g} "
            f"(population {population})"
        )

    def __reduce__(self):
        return (type(self), (self.time_of_breach, self.population, self.replica))


class NumericsError(RegulabError, RuntimeError):
    """A rate or total became non-finite, or an internal cache audit failed."""
