"""Finite-difference step study for the bracket check.

Runs the bracket verification at h in {1e-4, 1e-5, 1e-6} on a few sampled
Darboux points and prints the deviation profile.  Large h is dominated by
truncation (~h^2), small h by round-off (~eps / h).
"""
import argparse

import numpy as np

from sovlab.instances import default_chart
from sovlab.lambda_conn import random_point
from sovlab.poisson_check import verify_theorem
from sovlab.scenario import rng_from_seed


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=3)
    ap.add_argument("--lam", type=complex, default=1.0)
    ap.add_argument("--seed", type=int, default=7)
    a = ap.parse_args()
    mc = default_chart(a.lam)
    rng = rng_from_seed(a.seed)
    steps = (1e-4, 1e-5, 1e-6)
    print("sample  " + "  ".join(f"h={h:.0e}" for h in steps))
    for i in range(a.samples):
        pt = random_point(mc, rng)
        devs = [verify_theorem(mc, pt, tol=1e-4, h=h).max_dev for h in steps]
        print(f"{i:6d}  " + "  ".join(f"{d:.2e}" for d in devs)
              + f"   best h = {steps[int(np.argmin(devs))]:.0e}")


if __name__ == "__main__":
    main()
