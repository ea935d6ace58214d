"""Fit the exponent e in ||C||^2_block = c^-e ||C_factor||^2 for linear products f = cK + H.

Varies the coefficient on the first factor and regresses log block norm on log c,
sample by sample.
"""
import argparse

from finsler_product.metrics import RandersMetric, RiemannianMetric, euclidean
from finsler_product.product import Linear, ProductMetric
from finsler_product.verify import SamplePlan, fit_norm_exponent, sample_tangents

PAIRS = {
    "randers x euclidean": lambda: (RandersMetric.with_norm(0.5, 2), euclidean(3)),
    "randers x randers": lambda: (RandersMetric.with_norm(0.6, 3), RandersMetric.with_norm(0.3, 2)),
    "randers x riemannian": lambda: (RandersMetric.with_norm(0.8, 2), RiemannianMetric(2, [[2.0, 0.5], [0.5, 1.0]])),
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--coefficients", type=float, nargs="+", default=[0.5, 1.0, 2.0, 4.0, 8.0])
    args = ap.parse_args(argv)

    for name, build in PAIRS.items():
        f1, f2 = build()
        pm = ProductMetric(f1, f2, Linear(1.0, 1.0))
        samples = sample_tangents(pm.m, pm.n, SamplePlan(args.samples, args.seed))
        fit = fit_norm_exponent(pm, samples, tuple(args.coefficients))
        print(f"{name:<22} e = {fit['exponent']:.12g}  variance = {fit['variance']:.3g}  (factor {fit['factor']})")


if __name__ == "__main__":
    main()
