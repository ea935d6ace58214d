"""Sampled sup-norms of I and C for single Randers norms over a grid of (n, |b|).

Prints one row per grid point: sampled sup F|I|, its closed form, sampled sup
F||C|| and the closed-form bound.
"""
import argparse

import numpy as np

from finsler_product.metrics import RandersMetric
from finsler_product.verify import check_randers_bound


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", type=int, nargs="+", default=[2, 3, 4])
    ap.add_argument("--b", type=float, nargs="+", default=[0.0, 0.2, 0.4, 0.6, 0.8, 0.95])
    ap.add_argument("--directions", type=int, default=4096)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    print(f"{'n':>3} {'b':>6} {'sup F|I|':>12} {'formula':>12} {'sup F|C|':>12} {'bound':>12} verdict")
    for n in args.dims:
        for b in args.b:
            metric = RandersMetric.with_norm(b, n, direction=np.arange(1.0, n + 1.0))
            r = check_randers_bound(metric, directions=args.directions, seed=args.seed)
            m = r.measured
            print(f"{n:>3} {b:>6.3g} {m['I_sup']:>12.9f} {m['I_formula']:>12.9f} "
                  f"{m['C_sup']:>12.9f} {m['C_bound']:>12.9f} {r.verdict}")


if __name__ == "__main__":
    main()
