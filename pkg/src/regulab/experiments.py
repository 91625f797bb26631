"""Scenario files, verification checks, and persisted outputs.

A scenario file is an INI-style text file with four sections::

    [window]            dimension, side
    [model]             regime, birth_intensity, mortality, kernel params
    [run]               t_end, sample_times, replicas, seed, ...
    [verify]            check plus optional parameter overrides

Kernels are given by a ``<role>_family`` key plus that family's parameters,
where the role prefix is ``potential`` (establishment) or ``competition``.

Verification compares ensemble estimates against the analytic laws and
bounds and produces a BoundReport: one record per check with the empirical
value, the analytic value, the slack used, and the verdict.  Statistical
slack is three standard errors; one-sided bounds get one-sided checks.
Reports are pure functions of the persisted CSV outputs, and
``recompute_report`` rebuilds one from a written output directory alone.
"""

from __future__ import annotations

import configparser
import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analytics import (
    CompetitionBound,
    DENSITY_BOUND_MARGIN,
    SUPERSTABILITY_SLACK,
    ball_family_f_constant,
    derive_competition_bound,
    establishment_lower_bound,
    free_density,
    global_reg_density,
    riccati_solution,
    second_order_bound,
)
from .errors import RegulabError, ScenarioError
from .estimators import (
    DensityEstimate,
    PairCorrelationEstimate,
    estimate_density,
    estimate_pair_correlation,
)
from .geometry import TorusWindow
from .kernels import Kernel, kernel_from_params
from .models import ModelSpec, Regime, energy
from .simulator import (
    DEFAULT_HISTOGRAM_BINS,
    DEFAULT_POPULATION_CAP,
    EnsembleResult,
    Scenario,
    default_histogram_edges,
)

__all__ = [
    "VerifySpec",
    "Experiment",
    "load_scenario",
    "loads_scenario",
    "serialize_scenario",
    "CheckRecord",
    "BoundReport",
    "verify_free",
    "verify_global_regulation",
    "verify_establishment",
    "verify_competition",
    "verify_experiment",
    "AnalyticCurve",
    "analytic_curves",
    "superstability_rows",
    "write_outputs",
    "write_configurations_csv",
    "recompute_report",
]

STAT_SLACK_FACTOR = 3.0        # statistical slack is this many standard errors
GLOBAL_ABS_TOLERANCE = 0.01    # floor for global-regulation checks, times sigma/m
FREE_SLOPE_TOLERANCE = 0.03    # relative tolerance on the fitted free slope

_KERNEL_PARAM_KEYS = {
    "top_hat": ("radius", "height"),
    "gaussian": ("height", "length_scale"),
    "exponential": ("height", "rate"),
    "exponential_decay": ("height", "rate"),
    "tabulated": ("radii", "values"),
}


# ---------------------------------------------------------------------------
# scenario files


@dataclass(frozen=True)
class VerifySpec:
    """Which analytic check to run and with which parameters.

    Parameters default to the ones the model was run with; overriding them
    deliberately (a wrong intensity, a scaled constant) is how negative
    controls are phrased.
    """

    check: str
    birth_intensity: float
    initial_density: float
    mortality: float | None = None
    f_constant: float | None = None
    margin: float = DENSITY_BOUND_MARGIN
    second_order: bool = True


@dataclass(frozen=True)
class Experiment:
    """A scenario plus how many replicas to run and what to verify."""

    scenario: Scenario
    replicas: int
    verify: VerifySpec | None = None


def _parse_floats(text: str) -> tuple:
    return tuple(float(tok) for tok in text.replace(",", " ").split())


def _get_float(section, key: str, default=None) -> float | None:
    if key not in section:
        if default is None:
            return None
        return default
    try:
        return float(section[key])
    except ValueError as exc:
        raise ScenarioError(f"key {key!r} is not a number: {section[key]!r}") from exc


def _get_int(section, key: str, default=None) -> int | None:
    if key not in section:
        return default
    try:
        return int(section[key])
    except ValueError as exc:
        raise ScenarioError(f"key {key!r} is not an integer: {section[key]!r}") from exc


def _get_bool(section, key: str, default: bool) -> bool:
    if key not in section:
        return default
    text = section[key].strip().lower()
    if text in ("true", "yes", "on", "1"):
        return True
    if text in ("false", "no", "off", "0"):
        return False
    raise ScenarioError(f"key {key!r} is not a boolean: {section[key]!r}")


def _read_kernel(section, prefix: str, dimension: int) -> Kernel | None:
    family_key = f"{prefix}_family"
    if family_key not in section:
        return None
    family = section[family_key].strip().lower().replace("-", "_")
    if family not in _KERNEL_PARAM_KEYS:
        raise ScenarioError(f"unknown kernel family {section[family_key]!r} for {prefix!r}")
    params = {}
    for name in _KERNEL_PARAM_KEYS[family]:
        key = f"{prefix}_{name}"
        if key not in section:
            raise ScenarioError(f"kernel {prefix!r} ({family}) is missing key {key!r}")
        if name in ("radii", "values"):
            params[name] = _parse_floats(section[key])
        else:
            params[name] = float(section[key])
    return kernel_from_params(family, dimension, **params)


def loads_scenario(text: str) -> Experiment:
    """Parse a scenario file from a string.  See the module docstring."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"scenario file is not valid INI: {exc}") from exc

    for required in ("window", "model", "run"):
        if required not in parser:
            raise ScenarioError(f"scenario file is missing the [{required}] section")

    win = parser["window"]
    dimension = _get_int(win, "dimension")
    side = _get_float(win, "side")
    if dimension is None or side is None:
        raise ScenarioError("[window] needs both dimension and side")
    window = TorusWindow(dimension=dimension, side=side)

    mod = parser["model"]
    if "regime" not in mod:
        raise ScenarioError("[model] needs a regime")
    try:
        regime = Regime(mod["regime"].strip().lower())
    except ValueError as exc:
        raise ScenarioError(f"unknown regime {mod['regime']!r}") from exc
    birth_intensity = _get_float(mod, "birth_intensity")
    if birth_intensity is None:
        raise ScenarioError("[model] needs birth_intensity")
    model = ModelSpec(
        regime=regime,
        birth_intensity=birth_intensity,
        mortality=_get_float(mod, "mortality"),
        establishment_potential=_read_kernel(mod, "potential", dimension),
        competition_kernel=_read_kernel(mod, "competition", dimension),
    )

    runsec = parser["run"]
    t_end = _get_float(runsec, "t_end")
    if t_end is None or "sample_times" not in runsec:
        raise ScenarioError("[run] needs t_end and sample_times")
    sample_times = _parse_floats(runsec["sample_times"])
    replicas = _get_int(runsec, "replicas", 100)
    if replicas < 1:
        raise ScenarioError(f"replicas must be positive, got {replicas}")
    seed = _get_int(runsec, "seed", 0)

    edges = None
    if "histogram_bins" in runsec or "histogram_rmax" in runsec:
        bins = _get_int(runsec, "histogram_bins", DEFAULT_HISTOGRAM_BINS)
        rmax = _get_float(runsec, "histogram_rmax")
        if rmax is None:
            edges = default_histogram_edges(window, model.interaction_range, bins)
        else:
            edges = np.linspace(0.0, rmax, bins + 1)

    scenario = Scenario(
        model=model,
        window=window,
        t_end=t_end,
        sample_times=sample_times,
        seed=seed,
        initial_intensity=_get_float(runsec, "initial_intensity", 0.0),
        population_cap=_get_int(runsec, "population_cap", DEFAULT_POPULATION_CAP),
        store_snapshots=_get_bool(runsec, "store_snapshots", False),
        histogram_edges=edges,
    )

    verify = None
    if "verify" in parser:
        ver = parser["verify"]
        if "check" not in ver:
            raise ScenarioError("[verify] needs a check")
        check = ver["check"].strip().lower()
        if check != regime.value:
            raise ScenarioError(
                f"[verify] check {check!r} does not match the model regime {regime.value!r}"
            )
        if regime is Regime.GLAUBER:
            raise ScenarioError("no analytic check is available for the glauber regime")
        verify = VerifySpec(
            check=check,
            birth_intensity=_get_float(ver, "birth_intensity", model.birth_intensity),
            initial_density=_get_float(ver, "initial_density", scenario.initial_intensity),
            mortality=_get_float(ver, "mortality", model.mortality),
            f_constant=_get_float(ver, "f_constant", ball_family_f_constant(dimension)),
            margin=_get_float(ver, "margin", DENSITY_BOUND_MARGIN),
            second_order=_get_bool(ver, "second_order", True),
        )

    return Experiment(scenario=scenario, replicas=replicas, verify=verify)


def load_scenario(path) -> Experiment:
    """Load a scenario file from disk.

    Unreadable files raise OSError; malformed content raises ScenarioError.
    """
    text = Path(path).read_text()
    return loads_scenario(text)


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


def _kernel_lines(kernel: Kernel | None, prefix: str) -> list:
    if kernel is None:
        return []
    data = kernel.as_dict()
    lines = [f"{prefix}_family = {data.pop('family')}"]
    data.pop("dimension")
    for key, value in data.items():
        if isinstance(value, (list, tuple)):
            lines.append(f"{prefix}_{key} = " + " ".join(_fmt(v) for v in value))
        else:
            lines.append(f"{prefix}_{key} = {_fmt(value)}")
    return lines


def serialize_scenario(experiment: Experiment) -> str:
    """Render an experiment back to scenario-file text.

    Loading the result reproduces an equal experiment; the rendering is
    deterministic, so it doubles as the canonical echo written next to
    simulation outputs.
    """
    sc = experiment.scenario
    model = sc.model
    lines = [
        "[window]",
        f"dimension = {sc.window.dimension}",
        f"side = {_fmt(sc.window.side)}",
        "",
        "[model]",
        f"regime = {model.regime.value}",
        f"birth_intensity = {_fmt(model.birth_intensity)}",
    ]
    if model.mortality is not None:
        lines.append(f"mortality = {_fmt(model.mortality)}")
    lines += _kernel_lines(model.establishment_potential, "potential")
    lines += _kernel_lines(model.competition_kernel, "competition")
    lines += [
        "",
        "[run]",
        f"t_end = {_fmt(sc.t_end)}",
        "sample_times = " + " ".join(_fmt(t) for t in sc.sample_times),
        f"replicas = {experiment.replicas}",
        f"seed = {sc.seed}",
        f"initial_intensity = {_fmt(sc.initial_intensity)}",
        f"population_cap = {sc.population_cap}",
        f"store_snapshots = {_fmt(sc.store_snapshots)}",
        f"histogram_bins = {sc.histogram_edges.size - 1}",
        f"histogram_rmax = {_fmt(sc.histogram_edges[-1])}",
    ]
    ver = experiment.verify
    if ver is not None:
        lines += [
            "",
            "[verify]",
            f"check = {ver.check}",
            f"birth_intensity = {_fmt(ver.birth_intensity)}",
            f"initial_density = {_fmt(ver.initial_density)}",
        ]
        if ver.mortality is not None:
            lines.append(f"mortality = {_fmt(ver.mortality)}")
        if ver.f_constant is not None:
            lines.append(f"f_constant = {_fmt(ver.f_constant)}")
        lines.append(f"margin = {_fmt(ver.margin)}")
        lines.append(f"second_order = {_fmt(ver.second_order)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class CheckRecord:
    """One verified statement: empirical value against analytic value."""

    name: str
    kind: str              # "two_sided", "lower", or "upper"
    empirical: float
    analytic: float
    slack: float
    passed: bool
    time: float | None = None
    stderr: float | None = None
    context: str = ""

    @staticmethod
    def evaluate(name, kind, empirical, analytic, slack, time=None, stderr=None, context=""):
        if kind == "two_sided":
            ok = abs(empirical - analytic) <= slack
        elif kind == "lower":
            ok = empirical >= analytic - slack
        elif kind == "upper":
            ok = empirical <= analytic + slack
        else:
            raise ValueError(f"unknown check kind {kind!r}")
        return CheckRecord(
            name=name,
            kind=kind,
            empirical=float(empirical),
            analytic=float(analytic),
            slack=float(slack),
            passed=bool(ok),
            time=None if time is None else float(time),
            stderr=None if stderr is None else float(stderr),
            context=context,
        )


@dataclass(frozen=True)
class BoundReport:
    """All check records for one verified ensemble."""

    scenario_digest: str
    check: str
    records: tuple
    notes: tuple = ()

    @property
    def overall_pass(self) -> bool:
        return all(r.passed for r in self.records)

    def failures(self) -> list:
        return [r for r in self.records if not r.passed]

    def to_dict(self) -> dict:
        return {
            "scenario_digest": self.scenario_digest,
            "check": self.check,
            "overall_pass": self.overall_pass,
            "notes": list(self.notes),
            "records": [
                {
                    "name": r.name,
                    "kind": r.kind,
                    "time": r.time,
                    "empirical": r.empirical,
                    "analytic": r.analytic,
                    "slack": r.slack,
                    "stderr": r.stderr,
                    "context": r.context,
                    "passed": r.passed,
                }
                for r in self.records
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "BoundReport":
        records = tuple(
            CheckRecord(
                name=r["name"],
                kind=r["kind"],
                empirical=r["empirical"],
                analytic=r["analytic"],
                slack=r["slack"],
                passed=r["passed"],
                time=r["time"],
                stderr=r["stderr"],
                context=r.get("context", ""),
            )
            for r in data["records"]
        )
        return cls(
            scenario_digest=data["scenario_digest"],
            check=data["check"],
            records=records,
            notes=tuple(data.get("notes", ())),
        )


# ---------------------------------------------------------------------------
# check builders (shared between live verification and report recomputation)


def _free_records(times, means, stderrs, birth_intensity, initial_density):
    records = []
    for t, mean, se in zip(times, means, stderrs):
        records.append(
            CheckRecord.evaluate(
                "density",
                "two_sided",
                mean,
                free_density(initial_density, birth_intensity, t),
                STAT_SLACK_FACTOR * se,
                time=t,
                stderr=se,
            )
        )
    slope = float(np.polyfit(np.asarray(times, dtype=float), np.asarray(means, dtype=float), 1)[0])
    records.append(
        CheckRecord.evaluate(
            "density_slope",
            "two_sided",
            slope,
            birth_intensity,
            FREE_SLOPE_TOLERANCE * birth_intensity,
        )
    )
    return records


def _global_records(times, means, stderrs, birth_intensity, mortality, initial_density):
    level = birth_intensity / mortality
    records = []
    for t, mean, se in zip(times, means, stderrs):
        slack = max(STAT_SLACK_FACTOR * se, GLOBAL_ABS_TOLERANCE * level)
        records.append(
            CheckRecord.evaluate(
                "density",
                "two_sided",
                mean,
                global_reg_density(initial_density, birth_intensity, mortality, t),
                slack,
                time=t,
                stderr=se,
            )
        )
    t_last, mean_last, se_last = times[-1], means[-1], stderrs[-1]
    records.append(
        CheckRecord.evaluate(
            "invariant_limit",
            "two_sided",
            mean_last,
            level,
            STAT_SLACK_FACTOR * se_last,
            time=t_last,
            stderr=se_last,
        )
    )
    return records


def _establishment_records(times, means, stderrs, potential_mass, birth_intensity, initial_density):
    records = []
    for t, mean, se in zip(times, means, stderrs):
        bound = establishment_lower_bound(initial_density, potential_mass, birth_intensity * t)
        records.append(
            CheckRecord.evaluate(
                "growth_envelope",
                "lower",
                mean,
                bound,
                STAT_SLACK_FACTOR * se,
                time=t,
                stderr=se,
            )
        )
    return records


def _competition_density_records(times, means, stderrs, bound_d):
    return [
        CheckRecord.evaluate(
            "density_bound",
            "upper",
            mean,
            bound_d,
            STAT_SLACK_FACTOR * se,
            time=t,
            stderr=se,
        )
        for t, mean, se in zip(times, means, stderrs)
    ]


def _superstability_records(rows, constant, volume):
    """rows: (time, replica, count, energy) tuples.  Configurations with
    fewer than two points carry no pair energy and are skipped."""
    by_time: dict[float, list] = {}
    skipped = 0
    for time, _replica, count, pair_energy in rows:
        if count < 2:
            skipped += 1
            continue
        margin = 2.0 * pair_energy - constant * count * count / volume
        by_time.setdefault(float(time), []).append(margin)
    records = []
    for time in sorted(by_time):
        margins = by_time[time]
        records.append(
            CheckRecord.evaluate(
                "superstability",
                "lower",
                min(margins),
                0.0,
                SUPERSTABILITY_SLACK,
                time=time,
                context=f"{len(margins)} snapshots",
            )
        )
    return records, skipped


def _second_order_records(times, edges, k2_mean, k2_stderr, kernel, birth_intensity, bound_d):
    """Bound each short-range bin at each later time from the first sampled
    time; with the first sample at t=0 this is the plain short-distance
    estimate."""
    records = []
    if len(times) < 2:
        return records
    t0 = times[0]
    centers = 0.5 * (np.asarray(edges[:-1]) + np.asarray(edges[1:]))
    kernel_at = kernel.profile_array(centers)
    baseline = k2_mean[0]
    for i, t in enumerate(times[1:], start=1):
        for b, center in enumerate(centers):
            a_val = float(kernel_at[b])
            if a_val <= 0.0:
                continue
            bound = second_order_bound(a_val, float(baseline[b]), birth_intensity, bound_d, t - t0)
            records.append(
                CheckRecord.evaluate(
                    "pair_bound",
                    "upper",
                    float(k2_mean[i][b]),
                    bound,
                    STAT_SLACK_FACTOR * float(k2_stderr[i][b]),
                    time=t,
                    stderr=float(k2_stderr[i][b]),
                    context=f"r in ({edges[b]:.6g}, {edges[b + 1]:.6g}]",
                )
            )
    return records


# ---------------------------------------------------------------------------
# live verification


def verify_free(ens: EnsembleResult, birth_intensity: float, initial_density: float) -> BoundReport:
    """Check linear growth of the free density and its fitted slope."""
    est = estimate_density(ens)
    records = _free_records(est.times, est.mean, est.stderr, birth_intensity, initial_density)
    return BoundReport(
        scenario_digest=ens.scenario_digest,
        check="free",
        records=tuple(records),
        notes=(f"{ens.n_replicas} replicas",),
    )


def verify_global_regulation(
    ens: EnsembleResult,
    birth_intensity: float,
    mortality: float,
    initial_density: float,
) -> BoundReport:
    """Check exponential relaxation to the invariant level sigma/m."""
    est = estimate_density(ens)
    records = _global_records(
        est.times, est.mean, est.stderr, birth_intensity, mortality, initial_density
    )
    return BoundReport(
        scenario_digest=ens.scenario_digest,
        check="global_regulation",
        records=tuple(records),
        notes=(f"{ens.n_replicas} replicas",),
    )


def verify_establishment(
    ens: EnsembleResult,
    potential: Kernel,
    birth_intensity: float,
    initial_density: float,
) -> BoundReport:
    """Check the one-sided logarithmic growth envelope."""
    est = estimate_density(ens)
    mass = potential.total_mass()
    records = _establishment_records(
        est.times, est.mean, est.stderr, mass, birth_intensity, initial_density
    )
    notes = (
        f"{ens.n_replicas} replicas",
        f"potential mass {mass:.6g}",
        f"envelope evaluated at time * birth_intensity (intensity {birth_intensity:.6g})",
    )
    return BoundReport(
        scenario_digest=ens.scenario_digest,
        check="establishment",
        records=tuple(records),
        notes=notes,
    )


def superstability_rows(ens: EnsembleResult, kernel: Kernel) -> list:
    """(time, replica, count, energy) for every stored snapshot."""
    window = ens.scenario.window
    rows = []
    for tr in ens.trajectories:
        if tr.snapshots is None:
            continue
        for time, snap in zip(tr.sample_times, tr.snapshots):
            rows.append((float(time), tr.replica, len(snap), energy(kernel, snap, window)))
    return rows


def verify_competition(
    ens: EnsembleResult,
    kernel: Kernel,
    f_constant: float,
    birth_intensity: float,
    initial_density: float,
    bound: CompetitionBound | None = None,
    second_order: bool = True,
    margin: float = DENSITY_BOUND_MARGIN,
) -> BoundReport:
    """Check the uniform density bound, spot-check superstability on stored
    snapshots, and optionally check the short-distance pair bound.

    Passing ``bound`` explicitly swaps in a different derived-bound package;
    negative controls distort it there rather than faking the estimates.
    """
    if bound is None:
        bound = derive_competition_bound(
            kernel, f_constant, birth_intensity, initial_density, margin=margin
        )
    est = estimate_density(ens)
    records = _competition_density_records(est.times, est.mean, est.stderr, bound.bound)
    notes = [
        f"{ens.n_replicas} replicas",
        f"constant {bound.constant:.6g} at cutoff {bound.cutoff:.6g}",
        f"density bound {bound.bound:.6g} (equilibrium {bound.equilibrium:.6g})",
    ]
    rows = superstability_rows(ens, kernel)
    if rows:
        ss_records, skipped = _superstability_records(
            rows, bound.constant, ens.scenario.window.volume
        )
        records.extend(ss_records)
        if skipped:
            notes.append(f"superstability skipped {skipped} snapshots with fewer than 2 points")
    else:
        notes.append("no snapshots stored; superstability spot-check skipped")
    if second_order:
        pair = estimate_pair_correlation(ens)
        records.extend(
            _second_order_records(
                pair.times,
                pair.edges,
                pair.mean,
                pair.stderr,
                kernel,
                birth_intensity,
                bound.bound,
            )
        )
    return BoundReport(
        scenario_digest=ens.scenario_digest,
        check="competition",
        records=tuple(records),
        notes=tuple(notes),
    )


def verify_experiment(ens: EnsembleResult, experiment: Experiment) -> BoundReport:
    """Dispatch to the regime's verifier using the experiment's verify spec."""
    ver = experiment.verify
    if ver is None:
        raise ScenarioError("experiment has no [verify] section")
    model = experiment.scenario.model
    if ver.check == "free":
        return verify_free(ens, ver.birth_intensity, ver.initial_density)
    if ver.check == "global_regulation":
        return verify_global_regulation(ens, ver.birth_intensity, ver.mortality, ver.initial_density)
    if ver.check == "establishment":
        return verify_establishment(
            ens, model.establishment_potential, ver.birth_intensity, ver.initial_density
        )
    if ver.check == "competition":
        return verify_competition(
            ens,
            model.competition_kernel,
            ver.f_constant,
            ver.birth_intensity,
            ver.initial_density,
            second_order=ver.second_order,
            margin=ver.margin,
        )
    raise ScenarioError(f"no verifier for check {ver.check!r}")


# ---------------------------------------------------------------------------
# analytic curves


@dataclass(frozen=True)
class AnalyticCurve:
    name: str
    times: np.ndarray
    values: np.ndarray


def analytic_curves(experiment: Experiment, n_points: int = 201) -> list:
    """Dense analytic curves matching the experiment's verify spec; empty when
    there is nothing to verify."""
    ver = experiment.verify
    if ver is None:
        return []
    sc = experiment.scenario
    times = np.linspace(0.0, sc.t_end, n_points)
    if ver.check == "free":
        return [AnalyticCurve("free_density", times, free_density(ver.initial_density, ver.birth_intensity, times))]
    if ver.check == "global_regulation":
        level = ver.birth_intensity / ver.mortality
        return [
            AnalyticCurve(
                "global_density",
                times,
                global_reg_density(ver.initial_density, ver.birth_intensity, ver.mortality, times),
            ),
            AnalyticCurve("invariant_level", times, np.full_like(times, level)),
        ]
    if ver.check == "establishment":
        mass = sc.model.establishment_potential.total_mass()
        return [
            AnalyticCurve(
                "establishment_lower_bound",
                times,
                establishment_lower_bound(ver.initial_density, mass, ver.birth_intensity * times),
            )
        ]
    if ver.check == "competition":
        bound = derive_competition_bound(
            sc.model.competition_kernel,
            ver.f_constant,
            ver.birth_intensity,
            ver.initial_density,
            margin=ver.margin,
        )
        return [
            AnalyticCurve("density_bound", times, np.full_like(times, bound.bound)),
            AnalyticCurve(
                "riccati_envelope",
                times,
                riccati_solution(ver.birth_intensity, bound.constant, bound.bound, times),
            ),
        ]
    return []


# ---------------------------------------------------------------------------
# persistence


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _f(x) -> str:
    return format(float(x), ".17g")


def write_outputs(
    ens: EnsembleResult,
    out_dir,
    density: DensityEstimate | None = None,
    pairs: PairCorrelationEstimate | None = None,
    curves=(),
    report: BoundReport | None = None,
    experiment: Experiment | None = None,
    superstability=None,
    write_configurations: bool = False,
) -> list:
    """Write the persisted artifact set for one ensemble.

    Always writes density.csv, pair_correlation.csv, and analytic.csv (the
    last may hold only its header); report.json, scenario.ini,
    superstability.csv, and configurations.csv are written when their inputs
    are given.  Identical inputs produce byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    density = density if density is not None else estimate_density(ens)
    path = out / "density.csv"
    _write_csv(
        path,
        ["time", "mean_density", "stderr", "n_replicas"],
        [
            [_f(t), _f(m), _f(se), density.n_replicas]
            for t, m, se in zip(density.times, density.mean, density.stderr)
        ],
    )
    written.append(path)

    pairs = pairs if pairs is not None else estimate_pair_correlation(ens)
    rows = []
    for i, t in enumerate(pairs.times):
        for b in range(pairs.edges.size - 1):
            rows.append(
                [
                    _f(t),
                    _f(pairs.edges[b]),
                    _f(pairs.edges[b + 1]),
                    _f(pairs.mean[i][b]),
                    _f(pairs.stderr[i][b]),
                ]
            )
    path = out / "pair_correlation.csv"
    _write_csv(path, ["time", "r_lo", "r_hi", "k2", "stderr"], rows)
    written.append(path)

    rows = []
    for curve in curves:
        for t, v in zip(curve.times, curve.values):
            rows.append([_f(t), _f(v), curve.name])
    path = out / "analytic.csv"
    _write_csv(path, ["time", "value", "curve_name"], rows)
    written.append(path)

    if superstability:
        path = out / "superstability.csv"
        _write_csv(
            path,
            ["time", "replica", "count", "energy"],
            [[_f(t), r, n, _f(e)] for t, r, n, e in superstability],
        )
        written.append(path)

    if report is not None:
        path = out / "report.json"
        with open(path, "w", newline="\n") as fh:
            fh.write(report.to_json())
        written.append(path)

    if experiment is not None:
        path = out / "scenario.ini"
        with open(path, "w", newline="\n") as fh:
            fh.write(serialize_scenario(experiment))
        written.append(path)

    if write_configurations:
        path = out / "configurations.csv"
        write_configurations_csv(ens, path)
        written.append(path)

    return written


def write_configurations_csv(ens: EnsembleResult, path) -> None:
    """Dump stored snapshots as (replica, time, point id, coordinates) rows."""
    dimension = ens.scenario.window.dimension
    header = ["replica", "time", "point_id"] + [f"x{i + 1}" for i in range(dimension)]
    rows = []
    for tr in ens.trajectories:
        if tr.snapshots is None:
            continue
        for time, snap in zip(tr.sample_times, tr.snapshots):
            for pid, pos in zip(snap.ids, snap.positions):
                rows.append([tr.replica, _f(time), int(pid)] + [_f(c) for c in pos])
    _write_csv(Path(path), header, rows)


# ---------------------------------------------------------------------------
# report recomputation from persisted outputs


def _read_csv(path: Path) -> list:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return [dict(zip(header, row)) for row in reader]


def recompute_report(out_dir) -> BoundReport:
    """Rebuild the verification report from a written output directory.

    Uses only scenario.ini and the persisted CSV files, so it reproduces the
    original report's verdicts exactly.
    """
    out = Path(out_dir)
    experiment = load_scenario(out / "scenario.ini")
    ver = experiment.verify
    if ver is None:
        raise ScenarioError(f"{out}/scenario.ini has no [verify] section")
    sc = experiment.scenario

    try:
        records = _recompute_records(out, sc, ver)
    except RegulabError:
        raise
    except (ValueError, KeyError, StopIteration) as exc:
        raise ScenarioError(f"malformed artifact in {out}: {exc!r}") from exc

    return BoundReport(
        scenario_digest=sc.digest(),
        check=ver.check,
        records=tuple(records),
        notes=("recomputed from persisted outputs",),
    )


def _recompute_records(out: Path, sc: Scenario, ver: VerifySpec) -> list:
    density_rows = _read_csv(out / "density.csv")
    times = [float(r["time"]) for r in density_rows]
    means = [float(r["mean_density"]) for r in density_rows]
    stderrs = [float(r["stderr"]) for r in density_rows]

    if ver.check == "free":
        records = _free_records(times, means, stderrs, ver.birth_intensity, ver.initial_density)
    elif ver.check == "global_regulation":
        records = _global_records(
            times, means, stderrs, ver.birth_intensity, ver.mortality, ver.initial_density
        )
    elif ver.check == "establishment":
        mass = sc.model.establishment_potential.total_mass()
        records = _establishment_records(
            times, means, stderrs, mass, ver.birth_intensity, ver.initial_density
        )
    elif ver.check == "competition":
        bound = derive_competition_bound(
            sc.model.competition_kernel,
            ver.f_constant,
            ver.birth_intensity,
            ver.initial_density,
            margin=ver.margin,
        )
        records = _competition_density_records(times, means, stderrs, bound.bound)
        ss_path = out / "superstability.csv"
        if ss_path.exists():
            rows = [
                (float(r["time"]), int(r["replica"]), int(r["count"]), float(r["energy"]))
                for r in _read_csv(ss_path)
            ]
            ss_records, _ = _superstability_records(rows, bound.constant, sc.window.volume)
            records.extend(ss_records)
        if ver.second_order:
            pair_rows = _read_csv(out / "pair_correlation.csv")
            pair_times = sorted({float(r["time"]) for r in pair_rows})
            edge_pairs = sorted({(float(r["r_lo"]), float(r["r_hi"])) for r in pair_rows})
            edges = np.array([lo for lo, _ in edge_pairs] + [edge_pairs[-1][1]])
            index = {(float(r["time"]), float(r["r_lo"])): r for r in pair_rows}
            k2 = np.array(
                [[float(index[(t, lo)]["k2"]) for lo, _ in edge_pairs] for t in pair_times]
            )
            se = np.array(
                [[float(index[(t, lo)]["stderr"]) for lo, _ in edge_pairs] for t in pair_times]
            )
            records.extend(
                _second_order_records(
                    pair_times,
                    edges,
                    k2,
                    se,
                    sc.model.competition_kernel,
                    ver.birth_intensity,
                    bound.bound,
                )
            )
    else:
        raise ScenarioError(f"no verifier for check {ver.check!r}")
    return records
