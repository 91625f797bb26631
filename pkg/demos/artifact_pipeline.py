"""Produce a full artifact bundle: scenario file -> CSVs -> verified report.

Drives the installed CLI exactly as a user would, once for a
global-regulation scenario and once for a competition scenario:

    regulab verify --scenario <ini> --out <dir>
    regulab report --out <dir>

Each output directory ends up with density.csv, pair_correlation.csv,
analytic.csv, report.json and a scenario echo; ``report`` then re-derives
every verdict from the persisted files alone and must agree.  These bundles
are also what the plot frontend under frontend/ consumes.
"""
import argparse
import subprocess
import sys
from pathlib import Path

GLOBAL_REG = """\
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
replicas = {replicas}
seed = 213

[verify]
check = global_regulation
"""

COMPETITION = """\
[window]
dimension = 1
side = 50.0

[model]
regime = competition
birth_intensity = 1.0
competition_family = top_hat
competition_radius = 0.5
competition_height = 1.0

[run]
t_end = 20.0
sample_times = 1.0 5.0 10.0 20.0
replicas = {replicas}
seed = 441
initial_intensity = 0.5
store_snapshots = true

[verify]
check = competition
"""


def cli(*argv):
    cmd = [sys.executable, "-m", "regulab", *argv]
    print("$", " ".join(cmd[2:]))
    return subprocess.run(cmd).returncode


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("out"))
    ap.add_argument("--replicas", type=int, default=100)
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    for name, template in (("global_regulation", GLOBAL_REG), ("competition", COMPETITION)):
        scenario = args.out / f"{name}.ini"
        scenario.write_text(template.format(replicas=args.replicas))
        out_dir = args.out / name
        verify_rc = cli("verify", "--scenario", str(scenario), "--out", str(out_dir))
        report_rc = cli("report", "--out", str(out_dir))
        print(f"{name}: verify exit {verify_rc}, report exit {report_rc}")
        if report_rc not in (0, 1) or verify_rc not in (0, 1):
            raise SystemExit(f"{name}: unexpected exit codes")
        print(f"  files: {sorted(p.name for p in out_dir.iterdir())}\n")
    print("note: the competition verdicts can legitimately FAIL (exit 1).  The")
    print("density-bound rows trip over the flat-top kernel caveat in the README,")
    print("and the per-snapshot energy spot-check has no linear correction term, so")
    print("anti-clustered late-time configurations can dip below c n^2 / V even")
    print("though random (Poisson) configurations satisfy it comfortably.")


if __name__ == "__main__":
    main()
