"""Walk through the competition bound derivation, then test it empirically.

The chain is: kernel -> superstability constant c (grid search over tail
cutoffs) -> Riccati comparison -> uniform density bound D.  The script
prints every intermediate quantity, runs an ensemble, and reports where the
empirical density sits relative to D.

Two kernels are compared on purpose.  The gaussian kernel has a strictly
positive spectrum and the bound holds with room to spare.  The flat-top
kernel does not: configurations spread out at spacings beyond its radius
carry zero interaction energy, the quadratic energy inequality the constant
c is built on can fail for exactly the spread-out states the dynamics
favors, and the measured stationary density can sit a few percent above D.
The derivation is printed for both so the contrast is visible.
"""
import argparse

import numpy as np

from regulab.analytics import derive_competition_bound, riccati_solution
from regulab.estimators import estimate_density
from regulab.geometry import TorusWindow
from regulab.kernels import GaussianKernel, TopHatKernel
from regulab.models import ModelSpec
from regulab.simulator import Scenario, run_ensemble


def walkthrough(kernel, window, replicas, seed, initial_intensity):
    pack = derive_competition_bound(kernel, 1.0, 1.0, initial_intensity)
    print(f"\n=== {kernel.family_name} kernel ===")
    print(f"  total mass            {pack.kernel_mass:.6f}")
    print(f"  best tail cutoff h*   {pack.cutoff:.6f}")
    print(f"  tail mass at h*       {pack.tail_at_cutoff:.6f}")
    print(f"  superstability c      {pack.constant:.6f}")
    print(f"  equilibrium sqrt(s/c) {pack.equilibrium:.6f}")
    print(f"  uniform bound D       {pack.bound:.6f}")

    sc = Scenario(
        model=ModelSpec("competition", 1.0, competition_kernel=kernel),
        window=window,
        t_end=20.0,
        sample_times=(1.0, 5.0, 10.0, 20.0),
        seed=seed,
        initial_intensity=initial_intensity,
    )
    est = estimate_density(run_ensemble(sc, replicas))
    start = max(initial_intensity, pack.bound)
    envelope = riccati_solution(1.0, pack.constant, start * 1.0000001, np.array(est.times))
    print("  t      empirical   +-3SE     riccati envelope   vs D")
    for t, mean, se, env in zip(est.times, est.mean, est.stderr, envelope):
        mark = "ok" if mean <= pack.bound + 3 * se else "ABOVE D"
        print(f"  {t:4.1f}   {mean:8.4f}   {3*se:7.4f}   {env:12.4f}       {mark}")
    return pack


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--replicas", type=int, default=100)
    ap.add_argument("--side", type=float, default=50.0)
    ap.add_argument("--seed", type=int, default=19)
    ap.add_argument("--initial-intensity", type=float, default=0.5)
    args = ap.parse_args()

    window = TorusWindow(dimension=1, side=args.side)
    walkthrough(
        GaussianKernel(dimension=1, length_scale=0.4, height=1.0),
        window,
        args.replicas,
        args.seed,
        args.initial_intensity,
    )
    walkthrough(
        TopHatKernel(dimension=1, radius=0.5, height=1.0),
        window,
        args.replicas,
        args.seed + 1,
        args.initial_intensity,
    )
    print(
        "\nIf the flat-top run shows ABOVE D at late times while the gaussian"
        " run stays ok, that is the expected contrast, not a simulator bug."
    )


if __name__ == "__main__":
    main()
