"""Search small random 2-D clouds for a dyadic system whose property 4 fails.

Prints the first hit with coordinates rounded to 3 decimals (re-checked
after rounding), ready to paste into a regression test.
"""
from __future__ import annotations

import argparse

import numpy as np

from banach_indicatrix.dyadic_system import auto_params, build_dyadic_system, verify_properties
from banach_indicatrix.metric_space import build_point_cloud


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=6)
    parser.add_argument("--delta", type=float, default=0.9)
    parser.add_argument("--tries", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    for t in range(args.tries):
        pts = np.round(rng.random((args.n, 2)), 3)
        space = build_point_cloud(pts)
        if space.n < args.n:
            continue
        system = build_dyadic_system(space, auto_params(space, delta=args.delta))
        report = verify_properties(system)
        if not report.p4:
            print(f"try {t}: p4 fails, k_max={system.params.k_max}, constants={system.constants}")
            print("points =", pts.tolist())
            print("first failures (l, beta, k, alpha):", report.p4_failures[:5])
            return
    print("no failing instance found")


if __name__ == "__main__":
    main()
