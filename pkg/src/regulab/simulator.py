"""Exact event-driven simulation of the birth-and-death dynamics.

The sampler is a thinning construction.  Birth proposals arrive as a
homogeneous Poisson stream of total rate sigma * |window| with uniform
locations; a proposal establishes with the model's acceptance probability
(exp(-sum phi) for establishment-type regimes, 1 otherwise).  Deaths compete
with the proposal stream at their exact rates, so the embedded jump chain is
drawn from the true generator: waiting times are exponential in the total
rate, and the event type is chosen proportionally.

Competition death rates are cached per point and updated incrementally from
the points within the kernel cutoff when a neighbour appears or disappears.
The cached total is replaced by an exact resummation every 10^4 clock events,
and ``audit=True`` additionally recomputes every cached rate from scratch
every 10^3 clock events and fails loudly on disagreement.

Replica ``i`` of a scenario with seed ``s`` draws from a generator seeded by
the (s, i) spawn pair, so ensembles are reproducible replica by replica and
independent of how replicas are scheduled across workers.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ExplosionError, NumericsError, ScenarioError
from .geometry import CellGrid, Configuration, TorusWindow, pairwise_distances
from .models import ModelSpec, Regime

__all__ = [
    "Scenario",
    "Trajectory",
    "EnsembleResult",
    "Event",
    "ReplicaSimulation",
    "run",
    "run_ensemble",
    "default_histogram_edges",
]

RESUM_INTERVAL = 10_000
AUDIT_INTERVAL = 1_000
DEFAULT_POPULATION_CAP = 1_000_000
DEFAULT_HISTOGRAM_BINS = 40
_UNIFORM_BLOCK = 4096


def default_histogram_edges(window: TorusWindow, interaction_range: float, n_bins: int = DEFAULT_HISTOGRAM_BINS) -> np.ndarray:
    """Uniform radial bin edges on (0, r_max].

    r_max is five interaction ranges, clipped to half the window side; for
    models without an interaction kernel it is half the window side.
    """
    half = window.side / 2.0
    r_max = min(5.0 * interaction_range, half) if interaction_range > 0 else half
    return np.linspace(0.0, r_max, n_bins + 1)


@dataclass(frozen=True, eq=False)
class Scenario:
    """Everything needed to reproduce one ensemble: model, window, initial
    state, schedule, seed, and bookkeeping limits.

    The initial state is Poisson(initial_intensity) unless an explicit
    ``initial_configuration`` is given, in which case every replica starts
    from that same configuration.
    """

    model: ModelSpec
    window: TorusWindow
    t_end: float
    sample_times: tuple
    seed: int = 0
    initial_intensity: float = 0.0
    initial_configuration: Configuration | None = None
    population_cap: int = DEFAULT_POPULATION_CAP
    store_snapshots: bool = False
    histogram_edges: np.ndarray | None = None

    def __post_init__(self):
        if not math.isfinite(self.t_end) or self.t_end <= 0:
            raise ScenarioError(f"t_end must be positive and finite, got {self.t_end}")
        times = tuple(float(t) for t in np.asarray(self.sample_times, dtype=float).ravel())
        if any(not math.isfinite(t) for t in times):
            raise ScenarioError("sample times must be finite")
        if any(t < 0 or t > self.t_end for t in times):
            raise ScenarioError(f"sample times must lie in [0, {self.t_end}]")
        if any(b < a for a, b in zip(times, times[1:])):
            raise ScenarioError("sample times must be sorted")
        object.__setattr__(self, "sample_times", times)
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not (0 <= self.seed < 2**64):
            raise ScenarioError(f"seed must be an integer in [0, 2^64), got {self.seed!r}")
        if not isinstance(self.population_cap, int) or self.population_cap < 1:
            raise ScenarioError(f"population cap must be a positive integer, got {self.population_cap!r}")
        if self.initial_configuration is None:
            if not math.isfinite(self.initial_intensity) or self.initial_intensity < 0:
                raise ScenarioError(
                    f"initial intensity must be nonnegative and finite, got {self.initial_intensity}"
                )
        else:
            if self.initial_configuration.dimension != self.window.dimension:
                raise ScenarioError("initial configuration dimension does not match the window")
        for kernel in self.model.kernels_in_use():
            if kernel.dimension != self.window.dimension:
                raise ScenarioError(
                    f"kernel dimension {kernel.dimension} does not match window dimension "
                    f"{self.window.dimension}"
                )
        r_cut = self.model.interaction_range
        if r_cut > 0 and self.window.side < 2.0 * r_cut:
            raise ScenarioError(
                f"window side {self.window.side} must be at least twice the kernel cutoff {r_cut}"
            )
        if self.histogram_edges is None:
            edges = default_histogram_edges(self.window, r_cut)
        else:
            edges = np.asarray(self.histogram_edges, dtype=float).ravel()
        if edges.size < 2 or np.any(np.diff(edges) <= 0) or edges[0] < 0:
            raise ScenarioError("histogram edges must be increasing and nonnegative")
        if edges[-1] > self.window.side / 2.0 + 1e-12:
            raise ScenarioError(
                f"histogram edges reach {edges[-1]}, past half the window side "
                f"{self.window.side / 2.0}"
            )
        edges.setflags(write=False)
        object.__setattr__(self, "histogram_edges", edges)

    def fingerprint(self) -> dict:
        """Canonical plain-data form of the scenario, used for digests."""
        model = {
            "regime": self.model.regime.value,
            "birth_intensity": self.model.birth_intensity,
            "mortality": self.model.mortality,
            "establishment_potential": (
                self.model.establishment_potential.as_dict()
                if self.model.establishment_potential is not None
                else None
            ),
            "competition_kernel": (
                self.model.competition_kernel.as_dict()
                if self.model.competition_kernel is not None
                else None
            ),
        }
        init_cfg = None
        if self.initial_configuration is not None:
            init_cfg = {
                "ids": self.initial_configuration.ids.tolist(),
                "positions": self.initial_configuration.positions.tolist(),
            }
        return {
            "model": model,
            "window": {"dimension": self.window.dimension, "side": self.window.side},
            "t_end": self.t_end,
            "sample_times": list(self.sample_times),
            "seed": self.seed,
            "initial_intensity": self.initial_intensity,
            "initial_configuration": init_cfg,
            "population_cap": self.population_cap,
            "store_snapshots": self.store_snapshots,
            "histogram_edges": self.histogram_edges.tolist(),
        }

    def digest(self) -> str:
        blob = json.dumps(self.fingerprint(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One replica's record at the scenario's sample times.

    Counter arrays are cumulative from t=0 up to each sample time, so
    ``counts[i] == initial_count + births_accepted[i] - deaths[i]`` holds at
    every index.  ``pair_histograms[i]`` counts unordered point pairs per
    radial bin of ``histogram_edges`` at sample time i.
    """

    replica: int
    sample_times: tuple
    counts: np.ndarray
    births_proposed: np.ndarray
    births_accepted: np.ndarray
    deaths: np.ndarray
    initial_count: int
    histogram_edges: np.ndarray
    pair_histograms: np.ndarray
    snapshots: list | None = None


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    """Trajectories of independent replicas of one scenario, in replica order."""

    scenario: Scenario
    scenario_digest: str
    trajectories: list
    replica_indices: tuple

    @property
    def n_replicas(self) -> int:
        return len(self.trajectories)


@dataclass(frozen=True)
class Event:
    """A realized state change (rejected proposals do not produce events)."""

    kind: str
    time: float
    pid: int
    position: tuple


class ReplicaSimulation:
    """Stepwise simulation of one replica.

    ``run()`` executes the whole schedule and assembles a Trajectory;
    ``step()`` advances by a single exponential clock and returns the
    realized Event, or None when the clock fired a rejected proposal.
    """

    def __init__(self, scenario: Scenario, replica: int = 0, audit: bool = False):
        self.scenario = scenario
        self.replica = int(replica)
        self.audit = bool(audit)
        model = scenario.model
        window = scenario.window
        self.window = window
        self.dimension = window.dimension
        self.side = window.side
        self.volume = window.volume
        self.proposal_rate = model.birth_intensity * self.volume

        self.mortality = (
            float(model.mortality)
            if model.regime in (Regime.GLOBAL_REGULATION, Regime.GLAUBER)
            else 0.0
        )
        self.potential = (
            model.establishment_potential
            if model.regime in (Regime.ESTABLISHMENT, Regime.GLAUBER)
            else None
        )
        self.potential_range = model.potential_range
        self.competition = model.competition_kernel if model.regime is Regime.COMPETITION else None
        self.competition_range = model.competition_range

        seed_seq = np.random.SeedSequence(entropy=scenario.seed, spawn_key=(self.replica,))
        self.rng = np.random.default_rng(seed_seq)
        self._ubuf: list = []
        self._ubi = 0

        # The grid stores every live point; for kernel-free regimes its cell
        # size is immaterial because it is never queried.
        r_cut = model.interaction_range
        grid_cut = r_cut if r_cut > 0 else self.side / 2.0
        self.grid = CellGrid(window, grid_cut)

        self.time = 0.0
        self.events = 0
        self.births_proposed = 0
        self.births_accepted = 0
        self.deaths = 0
        self.alive: list[int] = []
        self._slot: dict[int, int] = {}
        self.death_rates: dict[int, float] = {}
        self.death_total = 0.0

        self._seed_initial_state()
        self.initial_count = self.population

    # -- random stream ---------------------------------------------------

    def _u(self) -> float:
        i = self._ubi
        if i >= len(self._ubuf):
            self._ubuf = self.rng.random(_UNIFORM_BLOCK).tolist()
            i = 0
        self._ubi = i + 1
        return self._ubuf[i]

    # -- state construction ----------------------------------------------

    def _seed_initial_state(self) -> None:
        cfg = self.scenario.initial_configuration
        if cfg is None:
            n = int(self.rng.poisson(self.scenario.initial_intensity * self.volume))
            positions = self.rng.random((n, self.dimension)) * self.side
            ids = range(n)
        else:
            positions = cfg.positions
            ids = [int(i) for i in cfg.ids]
        next_id = -1
        for pid, pos in zip(ids, positions):
            pid = int(pid)
            self.grid.insert(pid, pos)
            self._slot[pid] = len(self.alive)
            self.alive.append(pid)
            next_id = max(next_id, pid)
        self.next_id = next_id + 1
        if self.population > self.scenario.population_cap:
            raise ExplosionError(0.0, self.population)
        if self.competition is not None:
            profile = self.competition.profile
            r = self.competition_range
            total = 0.0
            for pid in self.alive:
                rate = 0.0
                pos = self.grid.position(pid)
                for _, dist in self.grid.neighbors_with_distances(pos, r, exclude=pid):
                    rate += profile(dist)
                self.death_rates[pid] = rate
                total += rate
            self.death_total = total

    @property
    def population(self) -> int:
        return len(self.alive)

    def configuration(self) -> Configuration:
        return self.grid.to_configuration()

    # -- event mechanics -------------------------------------------------

    def _total_death_rate(self) -> float:
        if self.mortality > 0.0:
            return self.mortality * len(self.alive)
        if self.competition is not None:
            return self.death_total
        return 0.0

    def _next_event_time(self) -> float:
        rate = self.proposal_rate + self._total_death_rate()
        if not math.isfinite(rate) or rate <= 0.0:
            raise NumericsError(f"total event rate became {rate!r} at t={self.time}")
        return self.time - math.log1p(-self._u()) / rate

    def _apply_event(self) -> Event | None:
        total_death = self._total_death_rate()
        pick = self._u() * (self.proposal_rate + total_death)
        if pick < self.proposal_rate:
            event = self._attempt_birth()
        else:
            event = self._execute_death(pick - self.proposal_rate)
        self.events += 1
        if self.competition is not None and self.events % RESUM_INTERVAL == 0:
            self.death_total = math.fsum(self.death_rates[p] for p in self.alive)
        if self.audit and self.events % AUDIT_INTERVAL == 0:
            self._audit_caches()
        return event

    def _attempt_birth(self) -> Event | None:
        self.births_proposed += 1
        side = self.side
        pos = tuple(self._u() * side for _ in range(self.dimension))
        if self.potential is not None:
            profile = self.potential.profile
            shade = 0.0
            for _, dist in self.grid.neighbors_with_distances(pos, self.potential_range):
                shade += profile(dist)
            if shade > 0.0 and self._u() >= math.exp(-shade):
                return None
        pid = self.next_id
        self.next_id += 1
        if self.competition is not None:
            profile = self.competition.profile
            rate = 0.0
            rates = self.death_rates
            for other, dist in self.grid.neighbors_with_distances(pos, self.competition_range):
                a = profile(dist)
                if a != 0.0:
                    rates[other] += a
                    rate += a
            rates[pid] = rate
            self.death_total += 2.0 * rate
        self.grid._insert_unchecked(pid, pos)
        self._slot[pid] = len(self.alive)
        self.alive.append(pid)
        self.births_accepted += 1
        if self.population > self.scenario.population_cap:
            raise ExplosionError(self.time, self.population)
        return Event("birth", self.time, pid, pos)

    def _execute_death(self, target: float) -> Event | None:
        alive = self.alive
        if self.mortality > 0.0:
            idx = int(target / self.mortality)
            pid = alive[idx if idx < len(alive) else len(alive) - 1]
        else:
            rates = self.death_rates
            cum = 0.0
            pid = -1
            for cand in alive:
                cum += rates[cand]
                if cum > target:
                    pid = cand
                    break
            if pid < 0:
                # Cached total drifted above the true mass; repair and treat
                # this clock as a no-op.
                for cand in reversed(alive):
                    if rates[cand] > 0.0:
                        pid = cand
                        break
            if pid < 0:
                self.death_total = math.fsum(rates[p] for p in alive)
                return None
        pos = self._remove(pid)
        if self.competition is not None:
            profile = self.competition.profile
            rates = self.death_rates
            shed = 0.0
            for other, dist in self.grid.neighbors_with_distances(pos, self.competition_range):
                a = profile(dist)
                if a != 0.0:
                    rates[other] -= a
                    shed += a
            self.death_total -= rates.pop(pid) + shed
        self.deaths += 1
        return Event("death", self.time, pid, pos)

    def _remove(self, pid: int) -> tuple:
        slot = self._slot.pop(pid)
        last = self.alive.pop()
        if last != pid:
            self.alive[slot] = last
            self._slot[last] = slot
        return self.grid.remove(pid)

    def _audit_caches(self) -> None:
        if self.competition is None:
            return
        profile = self.competition.profile
        r = self.competition_range
        total = 0.0
        for pid in self.alive:
            pos = self.grid.position(pid)
            direct = 0.0
            for _, dist in self.grid.neighbors_with_distances(pos, r, exclude=pid):
                direct += profile(dist)
            cached = self.death_rates[pid]
            if abs(cached - direct) > 1e-9 * max(1.0, abs(direct)):
                raise NumericsError(
                    f"death-rate cache drifted for point {pid}: cached {cached!r}, "
                    f"recomputed {direct!r}"
                )
            total += direct
        if abs(total - self.death_total) > 1e-9 * max(1.0, abs(total)):
            raise NumericsError(
                f"death-rate total drifted: cached {self.death_total!r}, recomputed {total!r}"
            )

    # -- public stepping -------------------------------------------------

    def step(self) -> Event | None:
        """Advance one exponential clock; return the realized event, if any."""
        self.time = self._next_event_time()
        return self._apply_event()

    def step_until_event(self, max_clocks: int = 1_000_000) -> Event:
        """Advance clocks until a state change happens and return it."""
        for _ in range(max_clocks):
            event = self.step()
            if event is not None:
                return event
        raise NumericsError(f"no state change within {max_clocks} clocks")

    def run(self) -> Trajectory:
        """Execute the scenario schedule and collect the trajectory record."""
        times = self.scenario.sample_times
        n_samples = len(times)
        edges = self.scenario.histogram_edges
        counts = np.zeros(n_samples, dtype=np.int64)
        proposed = np.zeros(n_samples, dtype=np.int64)
        accepted = np.zeros(n_samples, dtype=np.int64)
        died = np.zeros(n_samples, dtype=np.int64)
        histograms = np.zeros((n_samples, edges.size - 1), dtype=np.int64)
        snapshots: list | None = [] if self.scenario.store_snapshots else None

        def record(i: int) -> None:
            counts[i] = self.population
            proposed[i] = self.births_proposed
            accepted[i] = self.births_accepted
            died[i] = self.deaths
            if self.population >= 2:
                positions = np.array(list(self.grid._points.values()), dtype=float)
                dists = pairwise_distances(self.window, positions)
                histograms[i] = np.histogram(dists, bins=edges)[0]
            if snapshots is not None:
                snapshots.append(self.configuration())

        rec = 0
        while rec < n_samples:
            t_next = self._next_event_time()
            while rec < n_samples and times[rec] <= t_next:
                record(rec)
                rec += 1
            if rec >= n_samples:
                break
            self.time = t_next
            self._apply_event()

        return Trajectory(
            replica=self.replica,
            sample_times=times,
            counts=counts,
            births_proposed=proposed,
            births_accepted=accepted,
            deaths=died,
            initial_count=self.initial_count,
            histogram_edges=np.array(edges),
            pair_histograms=histograms,
            snapshots=snapshots,
        )


def run(scenario: Scenario, replica: int = 0, audit: bool = False) -> Trajectory:
    """Simulate one replica of a scenario."""
    try:
        return ReplicaSimulation(scenario, replica=replica, audit=audit).run()
    except ExplosionError as exc:
        raise ExplosionError(exc.time_of_breach, exc.population, replica=replica) from None


def _run_replica(args) -> Trajectory:
    scenario, replica, audit = args
    return run(scenario, replica=replica, audit=audit)


def run_ensemble(
    scenario: Scenario,
    n_replicas: int,
    n_jobs: int = 1,
    audit: bool = False,
) -> EnsembleResult:
    """Simulate independent replicas 0..n_replicas-1 of a scenario.

    Replica seeds depend only on the scenario seed and the replica index, and
    results are assembled in index order, so the output is identical for any
    ``n_jobs``.  Workers are separate processes; ``n_jobs=1`` runs inline.
    """
    if n_replicas < 1:
        raise ScenarioError(f"need at least one replica, got {n_replicas}")
    if n_jobs < 1:
        raise ScenarioError(f"worker count must be positive, got {n_jobs}")
    jobs = [(scenario, i, audit) for i in range(n_replicas)]
    if n_jobs == 1 or n_replicas == 1:
        trajectories = [_run_replica(job) for job in jobs]
    else:
        workers = min(n_jobs, n_replicas)
        chunk = max(1, n_replicas // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            trajectories = list(pool.map(_run_replica, jobs, chunksize=chunk))
    return EnsembleResult(
        scenario=scenario,
        scenario_digest=scenario.digest(),
        trajectories=trajectories,
        replica_indices=tuple(range(n_replicas)),
    )
