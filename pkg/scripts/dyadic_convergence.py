"""How the dyadic counts N_k(y) approach the exact multiplicity.

Builds one random cloud with clustered preimages, then prints, per
generation, the number of query values already resolved (N_k = exact) and
the total count deficit.
"""
from __future__ import annotations

import argparse

import numpy as np

from banach_indicatrix.dyadic_system import auto_params, build_dyadic_system
from banach_indicatrix.indicatrix import multiplicity_profile, sampled_mapping
from banach_indicatrix.metric_space import build_point_cloud


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=300)
    parser.add_argument("--labels", type=int, default=8)
    parser.add_argument("--delta", type=float, default=0.5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    # a few tight clusters so that coarse cubes merge many preimages
    centres = rng.random((5, 2))
    pts = centres[rng.integers(0, 5, args.n)] + 0.02 * rng.normal(size=(args.n, 2))
    space = build_point_cloud(pts)
    f = sampled_mapping(space, rng.integers(0, args.labels, space.n).tolist(), codomain="discrete")
    system = build_dyadic_system(space, auto_params(space, delta=args.delta))
    grid = list(range(args.labels))
    profile = multiplicity_profile(f, system, None, grid)

    exact = np.array(profile.exact)
    print(f"{space.n} points, generations {system.params.k_min}..{system.params.k_max}, exact total {exact.sum()}")
    print(f"{'k':>3} {'cubes':>6} {'resolved':>9} {'deficit':>8}")
    for k, counts in profile.levels.items():
        counts = np.array(counts)
        print(f"{k:>3} {len(system.generations[k]):>6} {int((counts == exact).sum()):>9} {int((exact - counts).sum()):>8}")


if __name__ == "__main__":
    main()
