"""Command-line interface.

Subcommands:

* ``simulate``: run the ensemble of a scenario file and persist the CSVs.
* ``verify``: simulate, then check the analytic bounds and persist the
  verification report alongside the CSVs.
* ``analytic``: emit analytic curves and derived constants without
  simulating.
* ``report``: recompute the verification verdicts from a previously written
  output directory.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 population explosion, 4 I/O error.  Worker count comes from --threads,
then the REGULAB_THREADS environment variable, then the machine's CPU count.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

from .analytics import derive_competition_bound, riccati_solution
from .errors import ExplosionError, RegulabError, ScenarioError
from .estimators import estimate_density, estimate_pair_correlation
from .experiments import (
    AnalyticCurve,
    analytic_curves,
    load_scenario,
    recompute_report,
    superstability_rows,
    verify_experiment,
    write_outputs,
)
from .simulator import run_ensemble

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_EXPLOSION = 3
EXIT_IO_ERROR = 4

log = logging.getLogger("regulab")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regulab",
        description="Spatial birth-and-death simulation with analytic regulation bounds.",
        epilog=(
            "exit codes: 0 success, 1 verification failure, 2 config error, "
            "3 population explosion, 4 I/O error"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, scenario=True, out=True):
        if scenario:
            p.add_argument("--scenario", required=True, help="scenario file to load")
        if out:
            p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--verbose", action="store_true", help="log progress details")

    p = sub.add_parser("simulate", help="run an ensemble and persist its estimates")
    add_common(p)
    p.add_argument("--replicas", type=int, help="override the replica count")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--threads", type=int, help="worker processes (default: REGULAB_THREADS or CPU count)")
    p.add_argument("--configurations", action="store_true", help="also dump snapshot coordinates")

    p = sub.add_parser("verify", help="simulate and check the analytic bounds")
    add_common(p)
    p.add_argument("--replicas", type=int, help="override the replica count")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--threads", type=int, help="worker processes (default: REGULAB_THREADS or CPU count)")
    p.add_argument("--configurations", action="store_true", help="also dump snapshot coordinates")

    p = sub.add_parser("analytic", help="emit analytic curves and constants without simulating")
    add_common(p)
    p.add_argument("--g0", type=float, help="start value for the Riccati envelope curve")

    p = sub.add_parser("report", help="recompute verification verdicts from written outputs")
    add_common(p, scenario=False)

    return parser


def _resolve_threads(requested: int | None) -> int:
    if requested is not None:
        if requested < 1:
            raise ScenarioError(f"--threads must be positive, got {requested}")
        return requested
    env = os.environ.get("REGULAB_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise ScenarioError(f"REGULAB_THREADS is not an integer: {env!r}") from exc
        if value < 1:
            raise ScenarioError(f"REGULAB_THREADS must be positive, got {value}")
        return value
    return os.cpu_count() or 1


def _apply_overrides(experiment, args):
    scenario = experiment.scenario
    if getattr(args, "seed", None) is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
    replicas = experiment.replicas
    if getattr(args, "replicas", None) is not None:
        if args.replicas < 1:
            raise ScenarioError(f"--replicas must be positive, got {args.replicas}")
        replicas = args.replicas
    return dataclasses.replace(experiment, scenario=scenario, replicas=replicas)


def _run_and_estimate(experiment, args):
    threads = _resolve_threads(getattr(args, "threads", None))
    log.info(
        "running %d replicas of regime %s on %d worker(s)",
        experiment.replicas,
        experiment.scenario.model.regime.value,
        threads,
    )
    ens = run_ensemble(experiment.scenario, experiment.replicas, n_jobs=threads)
    density = estimate_density(ens)
    pairs = estimate_pair_correlation(ens)
    return ens, density, pairs


def _competition_rows(ens, experiment):
    ver = experiment.verify
    if ver is None or ver.check != "competition":
        return None
    rows = superstability_rows(ens, experiment.scenario.model.competition_kernel)
    return rows or None


def _cmd_simulate(args) -> int:
    experiment = _apply_overrides(load_scenario(args.scenario), args)
    ens, density, pairs = _run_and_estimate(experiment, args)
    written = write_outputs(
        ens,
        args.out,
        density=density,
        pairs=pairs,
        curves=analytic_curves(experiment),
        experiment=experiment,
        superstability=_competition_rows(ens, experiment),
        write_configurations=args.configurations,
    )
    for path in written:
        log.info("wrote %s", path)
    print(f"simulated {experiment.replicas} replicas -> {args.out}")
    return EXIT_OK


def _print_report(report, verbose: bool) -> None:
    for record in report.records:
        if verbose or not record.passed:
            where = "" if record.time is None else f" t={record.time:g}"
            extra = f" [{record.context}]" if record.context else ""
            print(
                f"{'PASS' if record.passed else 'FAIL'} {record.name}{where}{extra}: "
                f"empirical {record.empirical:.6g} vs {record.kind.replace('_', '-')} "
                f"analytic {record.analytic:.6g} (slack {record.slack:.3g})"
            )
    n_pass = sum(1 for r in report.records if r.passed)
    print(
        f"{report.check}: {n_pass}/{len(report.records)} checks passed -> "
        f"{'PASS' if report.overall_pass else 'FAIL'}"
    )


def _cmd_verify(args) -> int:
    experiment = _apply_overrides(load_scenario(args.scenario), args)
    if experiment.verify is None:
        raise ScenarioError(f"{args.scenario} has no [verify] section")
    ens, density, pairs = _run_and_estimate(experiment, args)
    report = verify_experiment(ens, experiment)
    write_outputs(
        ens,
        args.out,
        density=density,
        pairs=pairs,
        curves=analytic_curves(experiment),
        report=report,
        experiment=experiment,
        superstability=_competition_rows(ens, experiment),
        write_configurations=args.configurations,
    )
    _print_report(report, args.verbose)
    return EXIT_OK if report.overall_pass else EXIT_VERIFICATION_FAILED


def _cmd_analytic(args) -> int:
    experiment = load_scenario(args.scenario)
    if experiment.verify is None:
        raise ScenarioError(f"{args.scenario} has no [verify] section to derive curves from")
    curves = analytic_curves(experiment)
    ver = experiment.verify
    constants = {"check": ver.check}
    if ver.check == "competition":
        bound = derive_competition_bound(
            experiment.scenario.model.competition_kernel,
            ver.f_constant,
            ver.birth_intensity,
            ver.initial_density,
            margin=ver.margin,
        )
        constants.update(
            kernel_mass=bound.kernel_mass,
            tail_at_cutoff=bound.tail_at_cutoff,
            constant=bound.constant,
            cutoff=bound.cutoff,
            density_bound=bound.bound,
            equilibrium=bound.equilibrium,
            f_constant=bound.f_constant,
        )
        if args.g0 is not None:
            times = curves[0].times
            curves = [
                c for c in curves if c.name != "riccati_envelope"
            ] + [
                AnalyticCurve(
                    "riccati_envelope",
                    times,
                    riccati_solution(ver.birth_intensity, bound.constant, args.g0, times),
                )
            ]
    elif args.g0 is not None:
        log.warning("--g0 only affects competition scenarios; ignored")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "analytic.csv", "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["time", "value", "curve_name"])
        for curve in curves:
            for t, v in zip(curve.times, curve.values):
                writer.writerow([format(float(t), ".17g"), format(float(v), ".17g"), curve.name])
    with open(out / "constants.json", "w", newline="\n") as fh:
        json.dump(constants, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for name, value in sorted(constants.items()):
        print(f"{name} = {value}")
    return EXIT_OK


def _cmd_report(args) -> int:
    report = recompute_report(args.out)
    _print_report(report, args.verbose)
    return EXIT_OK if report.overall_pass else EXIT_VERIFICATION_FAILED


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(message)s",
        stream=sys.stderr,
    )
    handlers = {
        "simulate": _cmd_simulate,
        "verify": _cmd_verify,
        "analytic": _cmd_analytic,
        "report": _cmd_report,
    }
    try:
        return handlers[args.command](args)
    except ExplosionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXPLOSION
    except RegulabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO_ERROR


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
