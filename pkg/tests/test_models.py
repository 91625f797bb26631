import math

import numpy as np
import pytest

from regulab.geometry import TorusWindow, Configuration, CellGrid
from regulab.kernels import TopHatKernel, GaussianKernel
from regulab.models import (
    Regime,
    ModelSpec,
    birth_proposal_rate,
    birth_acceptance,
    death_rate,
    energy,
)
from regulab.errors import ContractViolationError, ScenarioError

from oracles import brute_energy, min_image_distance


TOPHAT = TopHatKernel(dimension=1, radius=0.5, height=1.0)
GAUSS = GaussianKernel(dimension=1, height=1.0, length_scale=0.4)


def grid_of(positions, window, r_cut):
    g = CellGrid(window, r_cut)
    for i, p in enumerate(np.atleast_2d(positions)):
        g.insert(i, p)
    return g


def test_regime_values():
    assert {r.value for r in Regime} == {
        "free", "global_regulation", "establishment", "competition", "glauber",
    }


def test_model_validation_per_regime():
    ModelSpec(regime=Regime.FREE, birth_intensity=1.0)
    with pytest.raises(ScenarioError):
        ModelSpec(regime=Regime.GLOBAL_REGULATION, birth_intensity=1.0)  # no mortality
    with pytest.raises(ScenarioError):
        ModelSpec(regime=Regime.ESTABLISHMENT, birth_intensity=1.0)  # no potential
    with pytest.raises(ScenarioError):
        ModelSpec(regime=Regime.COMPETITION, birth_intensity=1.0)  # no kernel
    with pytest.raises(ScenarioError):
        ModelSpec(regime=Regime.FREE, birth_intensity=0.0)
    # glauber couples mortality with an establishment potential
    ModelSpec(regime=Regime.GLAUBER, birth_intensity=1.0, mortality=1.0,
              establishment_potential=TOPHAT)


def test_interaction_ranges():
    m = ModelSpec(regime=Regime.COMPETITION, birth_intensity=1.0, competition_kernel=TOPHAT)
    assert math.isclose(m.competition_range, 0.5, rel_tol=1e-9)
    assert m.interaction_range == m.competition_range
    free = ModelSpec(regime=Regime.FREE, birth_intensity=1.0)
    assert free.interaction_range == 0.0
    assert free.kernels_in_use() == []


def test_birth_proposal_rate_is_intensity_times_volume():
    m = ModelSpec(regime=Regime.FREE, birth_intensity=2.5)
    assert math.isclose(birth_proposal_rate(m, TorusWindow(2, 4.0)), 2.5 * 16.0, rel_tol=1e-12)


def test_birth_acceptance_free_is_one():
    m = ModelSpec(regime=Regime.FREE, birth_intensity=1.0)
    win = TorusWindow(1, 10.0)
    g = grid_of(np.array([[1.0], [2.0]]), win, 1.0)
    assert birth_acceptance(m, np.array([1.2]), g) == 1.0


def test_birth_acceptance_establishment_matches_direct_sum():
    m = ModelSpec(regime=Regime.ESTABLISHMENT, birth_intensity=1.0,
                  establishment_potential=GAUSS)
    win = TorusWindow(1, 10.0)
    rng = np.random.default_rng(5)
    pts = rng.uniform(0, 10.0, size=(12, 1))
    g = grid_of(pts, win, GAUSS.effective_range())
    x = np.array([3.3])
    expected = math.exp(-sum(
        GAUSS.profile(min_image_distance(10.0, x, p)) for p in pts
    ))
    got = birth_acceptance(m, x, g)
    assert math.isclose(got, expected, rel_tol=1e-9)
    assert 0.0 < got <= 1.0


def test_death_rate_mortality_regimes():
    win = TorusWindow(1, 10.0)
    g = grid_of(np.array([[1.0], [2.0]]), win, 1.0)
    m = ModelSpec(regime=Regime.GLOBAL_REGULATION, birth_intensity=1.0, mortality=0.7)
    assert death_rate(m, 0, g) == 0.7
    est = ModelSpec(regime=Regime.ESTABLISHMENT, birth_intensity=1.0,
                    establishment_potential=TOPHAT)
    assert death_rate(est, 0, g) == 0.0
    free = ModelSpec(regime=Regime.FREE, birth_intensity=1.0)
    assert death_rate(free, 1, g) == 0.0


def test_death_rate_competition_matches_direct_sum():
    win = TorusWindow(1, 20.0)
    rng = np.random.default_rng(9)
    pts = rng.uniform(0, 20.0, size=(30, 1))
    m = ModelSpec(regime=Regime.COMPETITION, birth_intensity=1.0, competition_kernel=TOPHAT)
    g = grid_of(pts, win, m.competition_range)
    for pid in (0, 7, 29):
        expected = sum(
            TOPHAT.profile(min_image_distance(20.0, pts[pid], p))
            for i, p in enumerate(pts) if i != pid
        )
        assert math.isclose(death_rate(m, pid, g), expected, rel_tol=1e-12)


def test_death_rate_missing_point():
    win = TorusWindow(1, 10.0)
    g = grid_of(np.array([[1.0]]), win, 1.0)
    m = ModelSpec(regime=Regime.COMPETITION, birth_intensity=1.0, competition_kernel=TOPHAT)
    with pytest.raises(ContractViolationError):
        death_rate(m, 42, g)


@pytest.mark.parametrize("kernel", [TOPHAT, GAUSS])
def test_energy_matches_pair_loop(kernel):
    win = TorusWindow(1, 15.0)
    rng = np.random.default_rng(13)
    pts = rng.uniform(0, 15.0, size=(20, 1))
    cfg = Configuration(pts, tuple(range(20)))
    expected = brute_energy(lambda r: kernel.profile(r), 15.0, pts)
    assert math.isclose(energy(kernel, cfg, win), expected, rel_tol=1e-10)


def test_energy_identity_with_death_rates():
    # sum of competition death rates counts every unordered pair twice
    win = TorusWindow(1, 12.0)
    rng = np.random.default_rng(21)
    pts = rng.uniform(0, 12.0, size=(25, 1))
    m = ModelSpec(regime=Regime.COMPETITION, birth_intensity=1.0, competition_kernel=TOPHAT)
    g = grid_of(pts, win, m.competition_range)
    total = sum(death_rate(m, pid, g) for pid in range(25))
    cfg = Configuration(pts, tuple(range(25)))
    assert math.isclose(total, 2.0 * energy(TOPHAT, cfg, win), rel_tol=1e-10)


def test_energy_empty_and_singleton():
    win = TorusWindow(2, 5.0)
    assert energy(TOPHAT, Configuration.empty(2), win) == 0.0
    one = Configuration(np.array([[1.0, 1.0]]), (0,))
    assert energy(TOPHAT, one, win) == 0.0
