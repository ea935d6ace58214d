"""Acceptance criteria 1-9, one printed pass/fail line each.

Run standalone with ``python tests/test_acceptance.py`` or through pytest, where
the lines are repeated in the terminal summary.
"""
from __future__ import annotations

import contextlib
import io
import itertools
import json
import math
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import FACTOR_NAMES, factor_family  # noqa: E402
from finsler_product.cli import main as cli_main  # noqa: E402
from finsler_product.metrics import CustomMetric, RandersMetric, RiemannianMetric, euclidean, unit_directions  # noqa: E402
from finsler_product.product import Linear, LpProduct, ProductMetric  # noqa: E402
from finsler_product.tensors import ProductEvaluator, mean_cartan, mixed_entries  # noqa: E402
from finsler_product.verify import (  # noqa: E402
    FAIL,
    PASS,
    CheckSpec,
    SamplePlan,
    check_c2like,
    check_homogeneity_suite,
    check_randers_bound,
    sample_tangents,
    single_metric_c2like,
)

PRODUCTS = {"Linear(1,1)": Linear(1, 1), "Linear(2,3)": Linear(2, 3), "Lp(4)": LpProduct(4)}
M, N = 2, 3  # first factor 2-D, second factor 3-D
RESULTS: dict[int, str] = {}


def _combos():
    for f1, f2, (pname, pf) in itertools.product(FACTOR_NAMES, FACTOR_NAMES, PRODUCTS.items()):
        yield f"{f1}x{f2}/{pname}", ProductMetric(factor_family(f1, M), factor_family(f2, N), pf), f1, f2, pname


def _record(number: int, title: str, ok: bool, detail: str) -> bool:
    line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    RESULTS[number] = line
    print(line)
    return ok


def _verify_run(config: dict, out: Path) -> tuple[int, dict, bytes]:
    cfg_path = out.with_suffix(".json")
    cfg_path.write_text(json.dumps(config))
    with contextlib.redirect_stdout(io.StringIO()):
        code = cli_main(["verify", "--config", str(cfg_path), "--out", str(out)])
    raw = (out / "report.json").read_bytes()
    return code, json.loads(raw), raw


# ---------------------------------------------------------------------------

def criterion_1() -> bool:
    worst, worst_name = 0.0, ""
    samples = sample_tangents(M, N, SamplePlan(50, seed=1))
    for name, pm, *_ in _combos():
        ev = ProductEvaluator(pm, samples)
        _, _, C_ad = ev.ad()
        C_cl = ev.cartan_closed()
        for s in range(len(samples)):
            bound = max(1e-8 * np.max(np.abs(C_ad[s])), 1e-10)
            r = np.max(np.abs(C_cl[s] - C_ad[s])) / bound
            if r > worst:
                worst, worst_name = r, name
    return _record(1, "route equivalence (48 combinations x 50 samples)", worst <= 1.0,
                   f"worst |closed - ad| / tolerance = {worst:.3g} ({worst_name})")


def criterion_2() -> bool:
    samples = sample_tangents(M, N, SamplePlan(50, seed=2))
    lin_worst, lp_min_witness, lp_count = 0.0, math.inf, 0
    for name, pm, f1, f2, pname in _combos():
        ev = ProductEvaluator(pm, samples)
        _, _, C = ev.ad()
        mixed = np.abs(mixed_entries(C, M)).max()
        if pname.startswith("Linear"):
            lin_worst = max(lin_worst, float(mixed))
        elif "randers" in f1 or "randers" in f2:
            lp_count += 1
            lp_min_witness = min(lp_min_witness, float(mixed))
    ok = lin_worst <= 1e-12 and lp_min_witness > 1e-4
    return _record(2, "splitting", ok, f"linear max mixed entry = {lin_worst:.3g}; "
                   f"weakest L^4 witness over {lp_count} Randers combinations = {lp_min_witness:.3g}")


def criterion_3() -> bool:
    worst = 0.0
    for name, pm, *_ in _combos():
        r = check_homogeneity_suite(CheckSpec(name, pm, SamplePlan(100, seed=3)))
        worst = max(worst, r.max_residual)
    control = check_homogeneity_suite(
        CheckSpec("control", ProductMetric(CustomMetric(2, "y1**2 + y2**2 + y1"), euclidean(3), Linear(1, 1)),
                  SamplePlan(100, seed=3)))
    ok = worst <= 1e-10 and control.verdict == FAIL
    return _record(3, "homogeneity suite", ok, f"max relative residual = {worst:.3g}; "
                   f"non-homogeneous control {control.verdict} (residual {control.max_residual:.3g})")


def criterion_4() -> bool:
    worst, worst_name = 0.0, ""
    samples = sample_tangents(M, N, SamplePlan(50, seed=4))
    eye = np.eye(M + N)
    for name, pm, *_ in _combos():
        ev = ProductEvaluator(pm, samples)
        _, g, _ = ev.ad()
        r = float(np.max(np.abs(g @ ev.g_inv_closed_blocks().full() - eye)))
        if r > worst:
            worst, worst_name = r, name
    return _record(4, "closed-form inverse", worst <= 1e-9, f"max |g N - Id| = {worst:.3g} ({worst_name})")


def criterion_5() -> bool:
    cases = [(2, 0.6), (2, 0.0), (2, 0.3), (3, 0.9), (3, 0.3), (4, 0.5)]
    details, ok = [], True
    for n, b in cases:
        r = check_randers_bound(RandersMetric.with_norm(b, n, direction=np.arange(1.0, n + 1.0)),
                                directions=4096, seed=5)
        m = r.measured
        ok &= m["I_sup"] < (n + 1) / math.sqrt(2) and m["C_sup"] <= m["C_bound"] + 1e-6
        if (n, b) == (2, 0.6):
            ok &= 0.9486 - 0.01 <= m["I_sup"] <= 0.948684
            details.append(f"n=2,b=0.6 sup F|I| = {m['I_sup']:.9f}")
        details.append(f"n={n},b={b}: C {m['C_sup']:.6f} <= {m['C_bound']:.6f}")
    return _record(5, "Randers sup-norms (4096 directions)", bool(ok), "; ".join(details))


def criterion_6() -> bool:
    samples = sample_tangents(M, N, SamplePlan(50, seed=6))
    worst_I, worst_norm, min_witness = 0.0, 0.0, math.inf
    for name, pm, f1, f2, pname in _combos():
        if pname == "Linear(2,3)":
            continue
        ev = ProductEvaluator(pm, samples)
        _, g, C = ev.ad()
        g_inv = np.linalg.inv(g)
        I = mean_cartan(g_inv, C)
        fa, fb = ev.factor_fibers()
        split = np.concatenate([fa.I, fb.I], axis=1)
        dev = np.abs(I - split).max(axis=1)
        if pname == "Linear(1,1)":
            scale = np.maximum(np.abs(I).max(axis=1), 1e-300)
            worst_I = max(worst_I, float(np.max(np.where(dev == 0, 0, dev / scale))))
            nI = np.einsum("si,sij,sj->s", I, g_inv, I)
            want = fa.normI_sq + fb.normI_sq
            rel = np.where(nI == want, 0.0, np.abs(nI - want) / np.maximum(np.abs(nI), 1e-300))
            worst_norm = max(worst_norm, float(rel.max()))
        elif "randers" in f1 or "randers" in f2:
            min_witness = min(min_witness, float(dev.max()))
    ok = worst_I <= 1e-10 and worst_norm <= 1e-9 and min_witness > 1e-4
    return _record(6, "mean-torsion splitting", ok, f"Linear(1,1): I deviation {worst_I:.3g}, "
                   f"norm deviation {worst_norm:.3g}; weakest L^4 witness {min_witness:.3g}")


def criterion_7() -> bool:
    rng = np.random.default_rng(7)
    alone = float(np.nanmax(single_metric_c2like(RandersMetric.with_norm(0.6, 2, direction=[1.0, 2.0]),
                                                 unit_directions(2, 500, rng))))
    plan = SamplePlan(50, seed=7)
    r_riem = check_c2like(CheckSpec("rr", ProductMetric(RandersMetric.with_norm(0.5, 2),
                                                        RiemannianMetric(2, np.diag([2.0, 3.0])), Linear(1, 1)), plan))
    r_rand = check_c2like(CheckSpec("rR", ProductMetric(RandersMetric.with_norm(0.5, 2),
                                                        RandersMetric.with_norm(0.5, 2, direction=[0.0, 1.0]),
                                                        Linear(1, 1)), plan))
    ok = alone <= 1e-8 and r_riem.verdict == PASS and r_rand.verdict == PASS and r_rand.max_residual > 1e-4
    return _record(7, "C2-like", ok, f"2-D Randers residual {alone:.3g} (units of |I|^3); "
                   f"Randers x Riemannian {r_riem.verdict} ({r_riem.max_residual:.3g}); "
                   f"Randers x Randers witness {r_rand.max_residual:.3g}")


RUN_CONFIGS = {
    "randers_riemannian_21": {
        "factor1": {"family": "randers", "dim": 2, "b_norm": 0.5},
        "factor2": {"family": "riemannian", "dim": 2, "a": [[2.0, 0.0], [0.0, 3.0]]},
        "product": {"linear": [2, 1]}, "samples": {"count": 50, "seed": 8}},
    "randers_randers_lp4": {
        "factor1": {"family": "randers", "dim": 2, "b_norm": 0.6},
        "factor2": {"family": "randers", "dim": 3, "b_norm": 0.3},
        "product": {"lp": 4}, "samples": {"count": 50, "seed": 8}},
    "randers_euclidean_11": {
        "factor1": {"family": "randers", "dim": 3, "b_norm": 0.4},
        "factor2": {"family": "euclidean", "dim": 2},
        "product": {"linear": [1, 1]}, "samples": {"count": 50, "seed": 8}},
}


def criterion_8() -> bool:
    ok, details = True, []
    with tempfile.TemporaryDirectory() as tmp:
        for name, cfg in RUN_CONFIGS.items():
            code, report, _ = _verify_run(cfg, Path(tmp) / name)
            checks = {c["check"]: c for c in report["checks"]}
            fit = checks["norm_split"]["measured"]["exponent_fit"]
            uv = checks["uv_reconciliation"]
            stable = fit["exponent"] is not None and fit["variance"] < 1e-6 and \
                abs(fit["exponent"] - round(fit["exponent"])) < 1e-6
            produced = uv["verdict"] == "RECONCILE" and uv["measured"]["literal_max_rel_residual"] is not None
            ok &= stable and produced and code in (0, 1)
            details.append(f"{name}: e = {fit['exponent']:.12g} (var {fit['variance']:.2g}), "
                           f"U/V literal residual {uv['measured']['literal_max_rel_residual']:.3g}")
    return _record(8, "reconciliation outputs", bool(ok), "; ".join(details))


def criterion_9() -> bool:
    cfg = RUN_CONFIGS["randers_randers_lp4"]
    with tempfile.TemporaryDirectory() as tmp:
        c1, _, raw1 = _verify_run(cfg, Path(tmp) / "first")
        c2, _, raw2 = _verify_run(cfg, Path(tmp) / "second")
    ok = raw1 == raw2 and c1 == c2 == 0
    return _record(9, "determinism", ok, f"{len(raw1)} bytes, identical = {raw1 == raw2}, exit codes {c1}/{c2}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9]


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda f: f.__name__)
def test_acceptance(criterion, capsys):
    with capsys.disabled():
        print()
        ok = criterion()
    assert ok, RESULTS


if __name__ == "__main__":
    outcomes = [c() for c in CRITERIA]
    print(f"{sum(outcomes)}/{len(outcomes)} criteria pass")
    sys.exit(0 if all(outcomes) else 1)
