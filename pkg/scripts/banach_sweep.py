"""Quadrature error of ∫N dy against TV(f) as the y-resolution grows.

Compares uniform y-cells with cells split at sample levels, on a builtin
or random piecewise-linear function. Prints a plain table.
"""
from __future__ import annotations

import argparse

from banach_indicatrix.variation import banach_check, builtin_function


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--builtin", default="randpl:0:50")
    parser.add_argument("--resolutions", default="10,100,1000,10000,100000")
    args = parser.parse_args()

    f = builtin_function(args.builtin)
    print(f"{args.builtin}: {f.xs.size} samples")
    print(f"{'yres':>8} {'uniform rel err':>16} {'aligned rel err':>16}")
    for yres in (int(t) for t in args.resolutions.split(",")):
        uniform = banach_check(f, yres, align=False)
        aligned = banach_check(f, yres, align=True)
        print(f"{yres:>8} {uniform.rel_diff:>16.3e} {aligned.rel_diff:>16.3e}")


if __name__ == "__main__":
    main()
