"""End-to-end acceptance suite.

One test per published acceptance criterion, at the stated tolerances and
runtime budgets.  Each test emits a single PASS/FAIL line through the
``acceptance_report`` fixture; the lines are repeated in the terminal
summary.  Ensembles are simulated once per module and shared where two
criteria examine the same scenario.

The suite is statistical but deterministic: every scenario seed is fixed, so
a verdict is reproducible run to run.
"""
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from regulab.analytics import (
    ball_family_f_constant,
    check_superstability,
    density_bound,
    derive_competition_bound,
    establishment_lower_bound,
    global_reg_density,
    riccati_solution,
    second_order_bound,
)
from regulab.estimators import estimate_density, estimate_pair_correlation
from regulab.geometry import CellGrid, Configuration, TorusWindow, sample_poisson
from regulab.kernels import TopHatKernel
from regulab.models import ModelSpec, birth_proposal_rate, death_rate
from regulab.simulator import ReplicaSimulation, Scenario, run_ensemble

from oracles import riccati_rk4_curve

WINDOW = TorusWindow(dimension=1, side=50.0)
TOP_HAT = TopHatKernel(dimension=1, radius=0.5, height=1.0)
F_CONSTANT = ball_family_f_constant(1)

# Derived bound packages for the competition scenarios (c, then D).
BOUND_LOW = derive_competition_bound(TOP_HAT, F_CONSTANT, 1.0, 0.5)
BOUND_HIGH = derive_competition_bound(TOP_HAT, F_CONSTANT, 1.0, 4.0)


def _timed_ensemble(scenario: Scenario, replicas: int):
    start = time.monotonic()
    ens = run_ensemble(scenario, replicas)
    return ens, time.monotonic() - start


# --- shared ensembles -------------------------------------------------------


@pytest.fixture(scope="module")
def free_run():
    sc = Scenario(
        model=ModelSpec("free", 1.0),
        window=WINDOW,
        t_end=5.0,
        sample_times=(1.0, 2.0, 3.0, 4.0, 5.0),
        seed=101,
        initial_intensity=0.0,
    )
    return _timed_ensemble(sc, 400)


@pytest.fixture(scope="module")
def global_runs():
    out = {}
    elapsed = 0.0
    for k0, seed in ((0.0, 213), (2.0, 214)):
        sc = Scenario(
            model=ModelSpec("global_regulation", 1.0, mortality=1.0),
            window=WINDOW,
            t_end=8.0,
            sample_times=(0.5, 1.0, 2.0, 4.0, 8.0),
            seed=seed,
            initial_intensity=k0,
        )
        ens, dt = _timed_ensemble(sc, 200)
        out[k0] = ens
        elapsed += dt
    return out, elapsed


@pytest.fixture(scope="module")
def establishment_run():
    sc = Scenario(
        model=ModelSpec("establishment", 1.0, establishment_potential=TOP_HAT),
        window=WINDOW,
        t_end=20.0,
        sample_times=(1.0, 5.0, 20.0),
        seed=331,
        initial_intensity=0.0,
    )
    return _timed_ensemble(sc, 200)


def _competition_scenario(initial_intensity: float, seed: int) -> Scenario:
    return Scenario(
        model=ModelSpec("competition", 1.0, competition_kernel=TOP_HAT),
        window=WINDOW,
        t_end=20.0,
        sample_times=(1.0, 5.0, 10.0, 20.0),
        seed=seed,
        initial_intensity=initial_intensity,
    )


@pytest.fixture(scope="module")
def competition_low():
    return _timed_ensemble(_competition_scenario(0.5, 441), 200)


@pytest.fixture(scope="module")
def competition_high():
    return _timed_ensemble(_competition_scenario(4.0, 442), 200)


@pytest.fixture(scope="module")
def poisson_snapshots():
    sc = Scenario(
        model=ModelSpec("free", 1.0),
        window=WINDOW,
        t_end=1e-9,
        sample_times=(0.0,),
        seed=771,
        initial_intensity=1.0,
    )
    return _timed_ensemble(sc, 500)


# --- criteria ---------------------------------------------------------------


def test_free_model_linear_growth(free_run, acceptance_report):
    ens, elapsed = free_run
    est = estimate_density(ens)
    target = np.array(est.times)  # sigma * t at sigma = 1
    within = np.abs(est.mean - target) <= 3.0 * est.stderr
    slope = float(np.polyfit(est.times, est.mean, 1)[0])
    slope_ok = abs(slope - 1.0) <= 0.03
    ok = bool(within.all()) and slope_ok and elapsed < 60.0
    acceptance_report(
        "1 free growth: density tracks sigma*t, slope within 3%",
        ok,
        f"slope={slope:.4f}, sim {elapsed:.1f}s",
    )
    assert within.all(), (est.mean, target, est.stderr)
    assert slope_ok, slope
    assert elapsed < 60.0


def test_global_regulation_relaxation(global_runs, acceptance_report):
    runs, elapsed = global_runs
    all_ok = True
    worst = 0.0
    for k0, ens in runs.items():
        est = estimate_density(ens)
        law = global_reg_density(k0, 1.0, 1.0, np.array(est.times))
        slack = np.maximum(3.0 * est.stderr, 0.01)
        gap = np.abs(est.mean - law)
        all_ok &= bool(np.all(gap <= slack))
        worst = max(worst, float(np.max(gap / slack)))
        # equilibrium reached: the last sample sits on sigma/m = 1
        all_ok &= abs(est.mean[-1] - 1.0) <= 3.0 * est.stderr[-1]
    ok = all_ok and elapsed < 60.0
    acceptance_report(
        "2 global regulation relaxes along the exponential law to sigma/m",
        ok,
        f"worst gap/slack={worst:.2f}, sim {elapsed:.1f}s",
    )
    assert all_ok
    assert elapsed < 60.0


def test_establishment_logarithmic_lower_bound(establishment_run, acceptance_report):
    ens, elapsed = establishment_run
    est = estimate_density(ens)
    envelope = establishment_lower_bound(0.0, TOP_HAT.total_mass(), np.array(est.times))
    above = est.mean >= envelope - 3.0 * est.stderr
    ok = bool(above.all()) and elapsed < 120.0
    acceptance_report(
        "3 establishment density stays above the logarithmic envelope",
        ok,
        f"density-envelope margins {np.round(est.mean - envelope, 3).tolist()}, sim {elapsed:.1f}s",
    )
    assert above.all(), (est.mean, envelope, est.stderr)
    assert elapsed < 120.0


def test_competition_density_bound_low_start(competition_low, acceptance_report):
    ens, elapsed = competition_low
    assert math.isclose(BOUND_LOW.constant, 0.5, rel_tol=1e-12)
    est = estimate_density(ens)
    under = est.mean <= BOUND_LOW.bound + 3.0 * est.stderr
    ok = bool(under.all()) and elapsed < 120.0
    acceptance_report(
        "4 competition density bounded by D (start below equilibrium)",
        ok,
        f"D={BOUND_LOW.bound:.4f}, density {np.round(est.mean, 3).tolist()}, sim {elapsed:.1f}s",
    )
    assert under.all(), (est.mean, BOUND_LOW.bound, est.stderr)
    assert elapsed < 120.0


def test_competition_density_bound_high_start(competition_low, competition_high, acceptance_report):
    ens, elapsed_high = competition_high
    elapsed = competition_low[1] + elapsed_high
    est = estimate_density(ens)
    under = est.mean <= BOUND_HIGH.bound + 3.0 * est.stderr
    ok = bool(under.all()) and elapsed < 120.0
    acceptance_report(
        "4 competition density bounded by D (start above equilibrium)",
        ok,
        f"D={BOUND_HIGH.bound:.1f}, density {np.round(est.mean, 3).tolist()}, both-branch sim {elapsed:.1f}s",
    )
    assert under.all(), (est.mean, BOUND_HIGH.bound, est.stderr)
    assert elapsed < 120.0


def test_competition_bound_negative_control(competition_low, acceptance_report):
    ens, _ = competition_low
    est = estimate_density(ens)
    # 100x the constant shrinks D below the true equilibrium density, so the
    # bound check must now fail; a tolerance that let this pass would be vacuous.
    shrunken = density_bound(1.0, 100.0 * BOUND_LOW.constant, 0.5)
    violated = est.mean > shrunken + 3.0 * est.stderr
    ok = bool(violated.any()) and bool(violated[-1])
    acceptance_report(
        "4 negative control: shrunken bound is detected as violated",
        ok,
        f"D_wrong={shrunken:.3f} vs late density {est.mean[-1]:.3f}",
    )
    assert ok, (est.mean, shrunken, est.stderr)


def test_riccati_closed_form_matches_rk4(acceptance_report):
    start = time.monotonic()
    worst = 0.0
    for source, damping, g0 in ((1.0, 1.0, 2.0), (1.0, 0.5, 2.0), (2.0, 1.0, 1.5)):
        times, reference = riccati_rk4_curve(source, damping, g0, 10.0, 20000, 10)
        closed = riccati_solution(source, damping, g0, times)
        worst = max(worst, float(np.max(np.abs(closed - reference))))
    elapsed = time.monotonic() - start
    ok = worst <= 1e-8 and elapsed < 1.0
    acceptance_report(
        "5 closed-form relaxation curve tracks an independent RK4",
        ok,
        f"max deviation {worst:.2e}, {elapsed:.2f}s",
    )
    assert worst <= 1e-8
    assert elapsed < 1.0


def test_superstability_on_poisson_configurations(acceptance_report):
    start = time.monotonic()
    constant = BOUND_LOW.constant
    rng = np.random.default_rng(661)
    violations = 0
    for _ in range(1000):
        cfg = sample_poisson(WINDOW, 2.0, rng)
        while len(cfg) < 2:
            cfg = sample_poisson(WINDOW, 2.0, rng)
        if not check_superstability(TOP_HAT, constant, WINDOW, cfg, slack=1e-12):
            violations += 1
    elapsed = time.monotonic() - start
    ok = violations == 0 and elapsed < 10.0
    acceptance_report(
        "6 quadratic energy inequality holds on 1000 Poisson configurations",
        ok,
        f"{violations} violations, {elapsed:.1f}s",
    )
    assert violations == 0
    assert elapsed < 10.0


def test_pair_correlation_flat_on_poisson(poisson_snapshots, acceptance_report):
    ens, elapsed = poisson_snapshots
    start = time.monotonic()
    est = estimate_pair_correlation(ens)
    elapsed += time.monotonic() - start
    k2 = est.mean[0]
    se = est.stderr[0]
    within = np.abs(k2 - 1.0) <= 3.0 * se
    ok = bool(within.all()) and elapsed < 30.0
    acceptance_report(
        "7 pair-correlation estimator is flat at rho^2 on Poisson snapshots",
        ok,
        f"{int(within.sum())}/{within.size} bins within 3*SE, {elapsed:.1f}s",
    )
    assert within.all(), (k2, se)
    assert elapsed < 30.0


def test_second_order_bound_inside_kernel_support(competition_low, acceptance_report):
    ens, sim_elapsed = competition_low
    start = time.monotonic()
    est = estimate_pair_correlation(ens)
    mids = 0.5 * (est.edges[:-1] + est.edges[1:])
    kernel_values = TOP_HAT.profile_array(mids)
    support = kernel_values > 0.0
    initial_pair_density = 0.5 * 0.5  # Poisson start at intensity 1/2
    all_ok = True
    for row, t in enumerate(est.times):
        bound = np.array(
            [
                second_order_bound(float(a), initial_pair_density, 1.0, BOUND_LOW.bound, t)
                for a in kernel_values[support]
            ]
        )
        emp = est.mean[row, support]
        se = est.stderr[row, support]
        all_ok &= bool(np.all(emp <= bound + 3.0 * se))
    elapsed = sim_elapsed + (time.monotonic() - start)
    ok = all_ok and elapsed < 120.0
    acceptance_report(
        "8 short-range pair density obeys the second-order envelope",
        ok,
        f"{int(support.sum())} bins x {len(est.times)} times, sim+est {elapsed:.1f}s",
    )
    assert all_ok
    assert elapsed < 120.0


DETERMINISM_INI = """\
[window]
dimension = 1
side = 50.0

[model]
regime = global_regulation
birth_intensity = 1.0
mortality = 1.0

[run]
t_end = 8.0
sample_times = 0.5 1.0 2.0 4.0 8.0
replicas = 200
seed = 911

[verify]
check = global_regulation
"""


def test_artifacts_byte_identical_across_runs_and_threads(tmp_path, acceptance_report):
    ini = tmp_path / "scenario.ini"
    ini.write_text(DETERMINISM_INI)
    outs = []
    for name, threads in (("a", "1"), ("b", "1"), ("c", "3")):
        out = tmp_path / name
        proc = subprocess.run(
            [
                sys.executable,
                "-m",
                "regulab",
                "simulate",
                "--scenario",
                str(ini),
                "--out",
                str(out),
                "--threads",
                threads,
            ],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outs.append(out)
    files = ("density.csv", "pair_correlation.csv", "analytic.csv")
    same = all(
        (outs[0] / f).read_bytes() == (other / f).read_bytes()
        for other in outs[1:]
        for f in files
    )
    acceptance_report(
        "9 artifacts byte-identical across reruns and thread counts",
        same,
        f"{len(files)} files x 3 runs",
    )
    assert same


def test_one_step_event_frequencies_match_rates(acceptance_report):
    window = TorusWindow(dimension=1, side=5.0)
    coords = np.array([0.5, 0.9, 1.2, 3.0])
    cfg = Configuration(positions=coords.reshape(-1, 1), ids=np.arange(4))
    model = ModelSpec("competition", 1.0, competition_kernel=TOP_HAT)

    grid = CellGrid.from_configuration(cfg, window, TOP_HAT.effective_range())
    rates = np.array([death_rate(model, int(pid), grid) for pid in cfg.ids])
    total_birth = birth_proposal_rate(model, window)
    total = total_birth + rates.sum()
    n_bins = 5
    p_death = rates / total
    p_birth_bin = np.full(n_bins, (total_birth / n_bins) / total)

    sc = Scenario(
        model=model,
        window=window,
        t_end=1e6,
        sample_times=(0.0,),
        seed=1001,
        initial_configuration=cfg,
    )
    n_runs = 100_000
    death_counts = np.zeros(4)
    birth_counts = np.zeros(n_bins)
    index_of = {float(x): i for i, x in enumerate(coords)}
    start = time.monotonic()
    for k in range(n_runs):
        sim = ReplicaSimulation(sc, replica=k)
        event = sim.step_until_event()
        if event.kind == "death":
            death_counts[index_of[event.position[0]]] += 1
        else:
            birth_counts[min(int(event.position[0]), n_bins - 1)] += 1
    elapsed = time.monotonic() - start

    freq_death = death_counts / n_runs
    freq_birth = birth_counts / n_runs
    se_death = np.sqrt(p_death * (1.0 - p_death) / n_runs)
    se_birth = np.sqrt(p_birth_bin * (1.0 - p_birth_bin) / n_runs)
    death_ok = np.abs(freq_death - p_death) <= 3.0 * se_death
    birth_ok = np.abs(freq_birth - p_birth_bin) <= 3.0 * se_birth
    ok = bool(death_ok.all()) and bool(birth_ok.all())
    acceptance_report(
        "10 one-step event frequencies match the generator rates",
        ok,
        f"9 categories incl. a zero-rate point, {elapsed:.1f}s for {n_runs} micro-runs",
    )
    assert death_ok.all(), (freq_death, p_death, se_death)
    assert birth_ok.all(), (freq_birth, p_birth_bin, se_birth)
