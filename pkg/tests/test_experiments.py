import json
import math

import numpy as np
import pytest

from regulab.simulator import run_ensemble
from regulab.estimators import estimate_density, estimate_pair_correlation
from regulab.experiments import (
    CheckRecord,
    BoundReport,
    loads_scenario,
    load_scenario,
    serialize_scenario,
    verify_free,
    verify_experiment,
    superstability_rows,
    analytic_curves,
    write_outputs,
    recompute_report,
)
from regulab.analytics import free_density, global_reg_density
from regulab.errors import ScenarioError


FREE_INI = """\
[window]
dimension = 1
side = 30.0

[model]
regime = free
birth_intensity = 1.0

[run]
t_end = 2.0
sample_times = 0.5 1.0 2.0
replicas = 24
seed = 9

[verify]
check = free
"""

GLOBAL_INI = """\
[window]
dimension = 1
side = 30.0

[model]
regime = global_regulation
birth_intensity = 1.0
mortality = 1.0

[run]
t_end = 6.0
sample_times = 1.0 3.0 6.0
replicas = 60
seed = 15

[verify]
check = global_regulation
"""

COMPETITION_INI = """\
[window]
dimension = 1
side = 30.0

[model]
regime = competition
birth_intensity = 1.0
competition_family = top_hat
competition_radius = 0.5
competition_height = 1.0

[run]
t_end = 6.0
sample_times = 1.0 3.0 6.0
replicas = 30
seed = 27
initial_intensity = 0.5
store_snapshots = true

[verify]
check = competition
"""


def test_parse_free_scenario():
    exp = loads_scenario(FREE_INI)
    assert exp.replicas == 24
    assert exp.scenario.seed == 9
    assert exp.scenario.sample_times == (0.5, 1.0, 2.0)
    assert exp.verify.check == "free"
    assert exp.verify.birth_intensity == 1.0
    assert exp.verify.initial_density == 0.0


def test_parse_kernel_and_comments():
    text = COMPETITION_INI.replace(
        "competition_radius = 0.5", "competition_radius = 0.5  # support radius"
    )
    exp = loads_scenario(text)
    k = exp.scenario.model.competition_kernel
    assert k.radius == 0.5 and k.height == 1.0
    assert exp.scenario.initial_intensity == 0.5


def test_serialize_round_trip_byte_identical():
    for ini in (FREE_INI, GLOBAL_INI, COMPETITION_INI):
        exp = loads_scenario(ini)
        text = serialize_scenario(exp)
        again = serialize_scenario(loads_scenario(text))
        assert text == again
        assert loads_scenario(text).scenario.digest() == exp.scenario.digest()


def test_load_scenario_from_file(tmp_path):
    p = tmp_path / "scen.ini"
    p.write_text(FREE_INI)
    exp = load_scenario(p)
    assert exp.scenario.t_end == 2.0


@pytest.mark.parametrize("mutate", [
    lambda s: s.replace("[window]\ndimension = 1\nside = 30.0\n\n", ""),
    lambda s: s.replace("regime = free", "regime = logistic"),
    lambda s: s.replace("check = free", "check = competition"),       # mismatch
    lambda s: s.replace("check = free", "check = glauber"),
    lambda s: s.replace("t_end = 2.0", "t_end = oops"),
    lambda s: s.replace("sample_times = 0.5 1.0 2.0", "sample_times = 3.0"),
])
def test_bad_scenarios_rejected(mutate):
    with pytest.raises(ScenarioError):
        loads_scenario(mutate(FREE_INI))


def test_glauber_runs_but_has_no_verifier():
    text = """\
[window]
dimension = 1
side = 10.0

[model]
regime = glauber
birth_intensity = 1.0
mortality = 1.0
potential_family = top_hat
potential_radius = 0.5
potential_height = 1.0

[run]
t_end = 1.0
sample_times = 1.0
replicas = 4
"""
    exp = loads_scenario(text)
    assert exp.verify is None
    ens = run_ensemble(exp.scenario, 2)
    assert len(ens.trajectories) == 2


def test_check_record_kinds():
    two = CheckRecord.evaluate("x", "two_sided", 1.0, 1.05, 0.1)
    assert two.passed
    assert not CheckRecord.evaluate("x", "two_sided", 1.0, 1.2, 0.1).passed
    assert CheckRecord.evaluate("x", "lower", 1.0, 0.5, 0.0).passed
    assert not CheckRecord.evaluate("x", "lower", 0.4, 0.5, 0.0).passed
    assert CheckRecord.evaluate("x", "upper", 0.4, 0.5, 0.0).passed
    assert not CheckRecord.evaluate("x", "upper", 0.7, 0.5, 0.1).passed
    with pytest.raises(ValueError):
        CheckRecord.evaluate("x", "sideways", 0.0, 0.0, 0.0)


def test_verify_free_passes_and_fails():
    exp = loads_scenario(FREE_INI)
    ens = run_ensemble(exp.scenario, exp.replicas)
    report = verify_free(ens, 1.0, 0.0)
    assert report.overall_pass
    assert report.scenario_digest == exp.scenario.digest()
    # negative control: claim twice the birth intensity
    wrong = verify_free(ens, 2.0, 0.0)
    assert not wrong.overall_pass
    assert wrong.failures


def test_verify_experiment_dispatch_global():
    exp = loads_scenario(GLOBAL_INI)
    ens = run_ensemble(exp.scenario, exp.replicas)
    report = verify_experiment(ens, exp)
    assert report.overall_pass
    names = [r.name for r in report.records]
    assert any("invariant" in n for n in names)


def test_report_json_round_trip():
    exp = loads_scenario(FREE_INI)
    ens = run_ensemble(exp.scenario, exp.replicas)
    report = verify_free(ens, 1.0, 0.0)
    clone = BoundReport.from_dict(json.loads(report.to_json()))
    assert clone.overall_pass == report.overall_pass
    assert len(clone.records) == len(report.records)
    for a, b in zip(clone.records, report.records):
        assert a.name == b.name and a.passed == b.passed
        assert math.isclose(a.empirical, b.empirical, rel_tol=1e-15)


def test_analytic_curves_free_and_global():
    free = analytic_curves(loads_scenario(FREE_INI))
    assert free[0].name == "free_density"
    t = free[0].times
    np.testing.assert_allclose(free[0].values, free_density(0.0, 1.0, np.asarray(t)), rtol=1e-12)
    glob = analytic_curves(loads_scenario(GLOBAL_INI))
    names = {c.name for c in glob}
    assert "global_density" in names and "invariant_level" in names


def test_superstability_rows_shape():
    exp = loads_scenario(COMPETITION_INI)
    ens = run_ensemble(exp.scenario, 4)
    rows = superstability_rows(ens, exp.scenario.model.competition_kernel)
    assert len(rows) == 4 * len(exp.scenario.sample_times)
    t, rep, count, en = rows[0]
    assert t == 1.0 and rep == 0 and count >= 0 and en >= 0.0


def test_write_outputs_and_recompute(tmp_path):
    exp = loads_scenario(GLOBAL_INI)
    ens = run_ensemble(exp.scenario, exp.replicas)
    density = estimate_density(ens)
    pairs = estimate_pair_correlation(ens)
    report = verify_experiment(ens, exp)
    curves = analytic_curves(exp)
    out = tmp_path / "out"
    written = write_outputs(
        ens, out, density=density, pairs=pairs, curves=curves,
        report=report, experiment=exp,
    )
    names = {p.name for p in written}
    assert {"density.csv", "pair_correlation.csv", "analytic.csv",
            "report.json", "scenario.ini"} <= names

    redone = recompute_report(out)
    assert redone.overall_pass == report.overall_pass
    assert redone.scenario_digest == report.scenario_digest
    for a, b in zip(redone.records, report.records):
        assert a.name == b.name and a.passed == b.passed
        assert math.isclose(a.empirical, b.empirical, rel_tol=1e-12)
        assert math.isclose(a.analytic, b.analytic, rel_tol=1e-12)


def test_written_files_are_deterministic(tmp_path):
    exp = loads_scenario(FREE_INI)
    ens = run_ensemble(exp.scenario, 6)
    density = estimate_density(ens)
    blobs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        write_outputs(ens, out, density=density, experiment=exp)
        blobs.append((out / "density.csv").read_bytes())
    assert blobs[0] == blobs[1]
    assert b"\r" not in blobs[0]


def test_competition_verify_includes_superstability(tmp_path):
    exp = loads_scenario(COMPETITION_INI)
    ens = run_ensemble(exp.scenario, exp.replicas)
    report = verify_experiment(ens, exp)
    kinds = {r.name.split("[")[0] for r in report.records}
    assert any("superstability" in k for k in kinds)
    assert any("density_bound" in k for k in kinds)
    # round trip through the artifact directory reproduces every verdict
    out = tmp_path / "out"
    write_outputs(
        ens, out,
        density=estimate_density(ens),
        pairs=estimate_pair_correlation(ens),
        curves=analytic_curves(exp),
        report=report,
        experiment=exp,
        superstability=superstability_rows(ens, exp.scenario.model.competition_kernel),
    )
    redone = recompute_report(out)
    assert [r.passed for r in redone.records] == [r.passed for r in report.records]
