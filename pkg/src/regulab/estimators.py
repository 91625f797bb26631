"""Empirical summaries of simulated ensembles.

Density is estimated per sample time as the replica mean of count / volume,
with the standard error of the replica mean.  The pair correlation estimate
divides ordered pair counts per radial bin by volume * shell volume; for a
Poisson ensemble of intensity rho it is centred on rho^2 in every bin, and
summing k2 * shellvol * volume over bins that cover every attainable
distance recovers the second factorial moment count*(count-1) exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError
from .geometry import pairwise_distances
from .kernels import ball_volume
from .simulator import EnsembleResult

__all__ = [
    "DensityEstimate",
    "PairCorrelationEstimate",
    "estimate_density",
    "estimate_pair_correlation",
    "shell_volume",
]


def shell_volume(dimension: int, r_lo: float, r_hi: float) -> float:
    """Volume of the d-dimensional annulus r_lo < r <= r_hi."""
    if r_hi < r_lo or r_lo < 0:
        raise ContractViolationError(f"bad annulus bounds ({r_lo}, {r_hi})")
    return ball_volume(dimension, r_hi) - ball_volume(dimension, r_lo)


@dataclass(frozen=True, eq=False)
class DensityEstimate:
    times: tuple
    mean: np.ndarray
    stderr: np.ndarray
    n_replicas: int


@dataclass(frozen=True, eq=False)
class PairCorrelationEstimate:
    times: tuple
    edges: np.ndarray
    mean: np.ndarray      # shape (n_times, n_bins)
    stderr: np.ndarray    # shape (n_times, n_bins)
    n_replicas: int


def _replica_matrix(ens: EnsembleResult, extract) -> np.ndarray:
    return np.array([extract(tr) for tr in ens.trajectories])


def estimate_density(ens: EnsembleResult) -> DensityEstimate:
    """Replica-mean density and its standard error at each sample time."""
    if ens.n_replicas < 2:
        raise ContractViolationError("density estimation needs at least two replicas")
    volume = ens.scenario.window.volume
    counts = _replica_matrix(ens, lambda tr: tr.counts) / volume
    mean = counts.mean(axis=0)
    stderr = counts.std(axis=0, ddof=1) / np.sqrt(ens.n_replicas)
    return DensityEstimate(
        times=ens.scenario.sample_times,
        mean=mean,
        stderr=stderr,
        n_replicas=ens.n_replicas,
    )


def _shell_volumes(dimension: int, edges: np.ndarray) -> np.ndarray:
    balls = np.array([ball_volume(dimension, r) for r in edges])
    return np.diff(balls)


def estimate_pair_correlation(
    ens: EnsembleResult,
    edges: np.ndarray | None = None,
) -> PairCorrelationEstimate:
    """Radial pair correlation estimate at each sample time.

    With the default ``edges=None`` the per-trajectory histograms recorded at
    the scenario's bin edges are used.  Different edges require stored
    snapshots to rebin from; edges may not reach past half the window side.
    """
    if ens.n_replicas < 2:
        raise ContractViolationError("pair correlation estimation needs at least two replicas")
    scenario = ens.scenario
    window = scenario.window
    if edges is None:
        target = scenario.histogram_edges
        per_replica = np.array([tr.pair_histograms for tr in ens.trajectories], dtype=float)
    else:
        target = np.asarray(edges, dtype=float).ravel()
        if target.size < 2 or np.any(np.diff(target) <= 0) or target[0] < 0:
            raise ContractViolationError("histogram edges must be increasing and nonnegative")
        if target[-1] > window.side / 2.0 + 1e-12:
            raise ContractViolationError(
                f"histogram edges reach {target[-1]}, past half the window side {window.side / 2.0}"
            )
        if np.array_equal(target, scenario.histogram_edges):
            per_replica = np.array([tr.pair_histograms for tr in ens.trajectories], dtype=float)
        else:
            rows = []
            for tr in ens.trajectories:
                if tr.snapshots is None:
                    raise ContractViolationError(
                        "rebinnning to new edges needs stored snapshots; "
                        "rerun the scenario with store_snapshots=True"
                    )
                rows.append(
                    [
                        np.histogram(pairwise_distances(window, snap.positions), bins=target)[0]
                        for snap in tr.snapshots
                    ]
                )
            per_replica = np.array(rows, dtype=float)

    shells = _shell_volumes(window.dimension, target)
    # Histograms hold unordered pairs; the estimator is defined on ordered ones.
    k2 = 2.0 * per_replica / (window.volume * shells)
    mean = k2.mean(axis=0)
    stderr = k2.std(axis=0, ddof=1) / np.sqrt(ens.n_replicas)
    return PairCorrelationEstimate(
        times=scenario.sample_times,
        edges=np.array(target),
        mean=mean,
        stderr=stderr,
        n_replicas=ens.n_replicas,
    )
