"""Compare transcribed and exact mean-torsion coefficients U, V against the jet oracle.

For each product function the script reports the worst relative residual of the
transcribed U, V, of the exact U, V obtained from the log-determinant, and of the
proportionality I = (U I_bar, V I_tilde).
"""
import argparse

from finsler_product.metrics import RandersMetric
from finsler_product.product import CustomProduct, Linear, LpProduct, ProductMetric
from finsler_product.verify import CheckSpec, SamplePlan, check_uv_reconciliation

PRODUCTS = {
    "linear(1,1)": Linear(1.0, 1.0),
    "linear(2,3)": Linear(2.0, 3.0),
    "lp(3)": LpProduct(3.0),
    "lp(4)": LpProduct(4.0),
    "K + H + sqrt(K*H)": CustomProduct("K + H + sqrt(K*H)"),
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    f1, f2 = RandersMetric.with_norm(0.6, 2), RandersMetric.with_norm(0.3, 3, direction=[0.0, 1.0, 1.0])
    print(f"{'product':<20} {'transcribed':>12} {'exact':>12} {'proportional':>13}")
    for name, pf in PRODUCTS.items():
        r = check_uv_reconciliation(CheckSpec(name, ProductMetric(f1, f2, pf), SamplePlan(args.samples, args.seed)))
        m = r.measured
        print(f"{name:<20} {m['literal_max_rel_residual']:>12.3g} {m['exact_max_rel_residual']:>12.3g} "
              f"{m['proportionality_max_rel_residual']:>13.3g}")


if __name__ == "__main__":
    main()
