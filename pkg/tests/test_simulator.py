import math

import numpy as np
import pytest

from regulab.geometry import TorusWindow, Configuration, pairwise_distances
from regulab.kernels import TopHatKernel
from regulab.models import ModelSpec, Regime
from regulab.simulator import (
    Scenario,
    ReplicaSimulation,
    default_histogram_edges,
    run,
    run_ensemble,
)
from regulab.errors import ExplosionError, ScenarioError

TOPHAT = TopHatKernel(dimension=1, radius=0.5, height=1.0)


def free_scenario(**kw):
    base = dict(
        model=ModelSpec(regime=Regime.FREE, birth_intensity=1.0),
        window=TorusWindow(1, 10.0),
        t_end=2.0,
        sample_times=(1.0, 2.0),
        seed=5,
    )
    base.update(kw)
    return Scenario(**base)


def competition_scenario(**kw):
    base = dict(
        model=ModelSpec(regime=Regime.COMPETITION, birth_intensity=1.0,
                        competition_kernel=TOPHAT),
        window=TorusWindow(1, 20.0),
        t_end=5.0,
        sample_times=(1.0, 3.0, 5.0),
        seed=3,
        initial_intensity=1.0,
    )
    base.update(kw)
    return Scenario(**base)


def test_digest_frozen():
    # persisted reports key on this; it must not move between runs or hosts
    assert free_scenario().digest() == (
        "67793d2a3e05f916ac93ec2466073dfe5f1ecd20c81a5fd844262e8df954049a"
    )


def test_digest_sensitive_to_fields():
    assert free_scenario().digest() != free_scenario(seed=6).digest()
    assert free_scenario().digest() != free_scenario(t_end=3.0, sample_times=(1.0, 3.0)).digest()


@pytest.mark.parametrize("bad", [
    dict(sample_times=(2.0, 1.0)),
    dict(sample_times=(1.0, 3.0)),          # beyond t_end
    dict(sample_times=(-1.0, 1.0)),
    dict(seed=-1),
    dict(seed=2**64),
    dict(t_end=-2.0),
    dict(initial_intensity=-0.5),
    dict(population_cap=0),
])
def test_scenario_validation(bad):
    with pytest.raises(ScenarioError):
        free_scenario(**bad)


def test_scenario_rejects_small_window():
    # window must fit two interaction ranges so the cell grid has no aliasing
    with pytest.raises(ScenarioError):
        competition_scenario(window=TorusWindow(1, 0.9))


def test_scenario_rejects_wrong_kernel_dimension():
    with pytest.raises(ScenarioError):
        competition_scenario(window=TorusWindow(2, 20.0))


def test_histogram_edges_default():
    win = TorusWindow(1, 20.0)
    edges = default_histogram_edges(win, 0.5)
    assert edges[0] == 0.0
    assert math.isclose(edges[-1], 2.5, rel_tol=1e-12)  # 5 * r_cut
    assert len(edges) == 41
    # without a kernel the range extends to half the window
    far = default_histogram_edges(win, 0.0)
    assert math.isclose(far[-1], 10.0, rel_tol=1e-12)


def test_histogram_edges_beyond_half_window_rejected():
    with pytest.raises(ScenarioError):
        free_scenario(histogram_edges=np.array([0.0, 4.0, 6.0]))  # 6 > L/2


def test_replica_determinism():
    a = run(free_scenario(), replica=2)
    b = run(free_scenario(), replica=2)
    np.testing.assert_array_equal(a.counts, b.counts)
    np.testing.assert_array_equal(a.pair_histograms, b.pair_histograms)
    c = run(free_scenario(), replica=3)
    assert not np.array_equal(a.counts, c.counts)


def test_bookkeeping_identity():
    for scen in (free_scenario(seed=11), competition_scenario(seed=12)):
        for replica in range(4):
            tr = run(scen, replica=replica)
            np.testing.assert_array_equal(
                tr.counts, tr.initial_count + tr.births_accepted - tr.deaths
            )


def test_free_model_statistics():
    scen = free_scenario(t_end=4.0, sample_times=(4.0,), seed=1)
    trajs = [run(scen, replica=r) for r in range(60)]
    assert all(t.deaths[-1] == 0 for t in trajs)
    assert all(t.births_proposed[-1] == t.births_accepted[-1] for t in trajs)
    counts = np.array([t.counts[-1] for t in trajs], dtype=float)
    mean = counts.mean() / 10.0
    se = counts.std(ddof=1) / math.sqrt(len(counts)) / 10.0
    assert abs(mean - 4.0) <= 3 * se + 1e-12


def test_global_regulation_has_deaths():
    scen = free_scenario(
        model=ModelSpec(regime=Regime.GLOBAL_REGULATION, birth_intensity=1.0, mortality=1.0),
        t_end=6.0, sample_times=(6.0,), initial_intensity=2.0, seed=8,
    )
    tr = run(scen, replica=0)
    assert tr.deaths[-1] > 0
    assert tr.initial_count > 0


def test_establishment_thins_proposals():
    scen = free_scenario(
        model=ModelSpec(regime=Regime.ESTABLISHMENT, birth_intensity=1.0,
                        establishment_potential=TOPHAT),
        window=TorusWindow(1, 20.0),
        t_end=8.0, sample_times=(8.0,), seed=2,
    )
    tr = run(scen, replica=0)
    assert tr.births_accepted[-1] < tr.births_proposed[-1]
    assert tr.deaths[-1] == 0


def test_explosion_raises_with_context():
    scen = free_scenario(t_end=50.0, sample_times=(50.0,), population_cap=25)
    with pytest.raises(ExplosionError) as info:
        run(scen, replica=7)
    err = info.value
    assert err.population >= 25
    assert 0.0 < err.time_of_breach <= 50.0
    assert err.replica == 7


def test_audit_mode_clean_for_competition():
    # audited run recomputes every cached death rate; any drift raises
    tr = run(competition_scenario(t_end=3.0, sample_times=(3.0,)), replica=1, audit=True)
    assert tr.counts[-1] >= 0


def test_snapshots_and_histograms_consistent():
    scen = competition_scenario(store_snapshots=True, seed=19)
    tr = run(scen, replica=0)
    assert len(tr.snapshots) == len(scen.sample_times)
    for i, snap in enumerate(tr.snapshots):
        assert len(snap.ids) == tr.counts[i]
        if tr.counts[i] >= 2:
            dists = pairwise_distances(scen.window, snap.positions)
            expected = np.histogram(dists, bins=tr.histogram_edges)[0]
            np.testing.assert_array_equal(tr.pair_histograms[i], expected)


def test_initial_configuration_used():
    pts = np.linspace(0.5, 9.5, 10)[:, None]
    cfg = Configuration(pts, tuple(range(10)))
    scen = free_scenario(initial_configuration=cfg, sample_times=(1e-9, 2.0), t_end=2.0)
    tr = run(scen, replica=0)
    assert tr.initial_count == 10
    assert tr.counts[0] == 10  # nothing can happen before the first sample


def test_ensemble_worker_count_invariance():
    scen = competition_scenario(seed=23)
    serial = run_ensemble(scen, 6, n_jobs=1)
    pooled = run_ensemble(scen, 6, n_jobs=3)
    assert serial.replica_indices == pooled.replica_indices
    for a, b in zip(serial.trajectories, pooled.trajectories):
        assert a.replica == b.replica
        np.testing.assert_array_equal(a.counts, b.counts)
        np.testing.assert_array_equal(a.pair_histograms, b.pair_histograms)


def test_ensemble_explosion_reports_replica():
    scen = free_scenario(t_end=50.0, sample_times=(50.0,), population_cap=25)
    with pytest.raises(ExplosionError) as info:
        run_ensemble(scen, 3, n_jobs=2)
    assert info.value.replica in (0, 1, 2)


def test_step_until_event_returns_event():
    sim = ReplicaSimulation(free_scenario(), replica=0)
    ev = sim.step_until_event()
    assert ev.kind == "birth"
    assert sim.population == 1
