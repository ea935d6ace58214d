"""Command-line front end: ``eval``, ``verify`` and ``sweep``.

Exit codes: 0 ok, 1 a check FAILed, 2 invalid config, 3 inadmissible point.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, dumps, load_config
from .jets import JetDomainError
from .metrics import MetricDomainError, RandersMetric, TangentSample, unit_directions
from .product import InadmissiblePoint, LpProduct, ProductMetric
from .schema import SCHEMA_VERSION
from .tensors import (
    ProductEvaluator,
    mixed_entries,
    norms,
    randers_cartan_bound,
    randers_mean_norm_formula,
    tensor_bundle,
)
from .verify import (
    FAIL,
    CheckSpec,
    SamplePlan,
    factor_bounds,
    product_sups,
    run_suite,
    sample_tangents,
    sampled_sups,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_POINT = 0, 1, 2, 3

SAMPLE_COLUMNS = ["sample_id", "K", "H", "delta", "normC_sq", "normI_sq", "max_mixed_C",
                  "mixed_C_zero", "I_splits", "routes_agree"]
SWEEP_COLUMNS = ["kind", "n", "b", "p", "sup_I", "sup_C", "formula_I", "bound_C", "window_bound_I",
                 "window_bound_C"]

REPORT_NOTES = [
    "boundedness is checked for the pair of factor metrics (first and second factor)",
    "linear products f = a K + b H: a multiplies the first factor's squared norm",
    "sup-norm of C uses max |C(u,u,u)| over g-unit u; norm_split uses the full contraction",
]


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, (bool, np.bool_)):
        return "yes" if x else "no"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.9g}"
    return str(x)


def _table(rows: list[dict], columns: list[str]) -> str:
    cells = [[_fmt(r.get(c)) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines)


def _csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({c: ("" if r.get(c) is None else repr(float(r[c])) if isinstance(r.get(c), float)
                        else r.get(c)) for c in columns})
    return buf.getvalue()


def _matrix_text(name: str, a: np.ndarray) -> str:
    a = np.asarray(a)
    if a.ndim == 1:
        return f"{name} = [" + ", ".join(_fmt(v) for v in a) + "]"
    if a.ndim == 2:
        body = "\n".join("  [" + ", ".join(_fmt(v) for v in row) + "]" for row in a)
        return f"{name} =\n{body}"
    parts = [f"{name}[{i}] =\n" + "\n".join("  [" + ", ".join(_fmt(v) for v in row) + "]" for row in a[i])
             for i in range(a.shape[0])]
    return "\n".join(parts)


# ---------------------------------------------------------------------------
# eval

def eval_record(pm: ProductMetric, y: TangentSample) -> dict:
    """Everything computed at one direction, in both routes where they exist."""
    ad = tensor_bundle(pm, y, "ad")
    closed = tensor_bundle(pm, y, "closed")
    nm = norms(ad)
    return {
        "y_bar": y.y_bar, "y_tilde": y.y_tilde,
        "K": ad.K, "H": ad.H, "F2": ad.F2, "delta": ad.delta,
        "partials": ad.partials.as_dict(),
        "g": ad.g, "g_closed": closed.g, "g_inv": ad.g_inv, "g_inv_closed": closed.g_inv,
        "C": ad.C, "C_closed": closed.C, "I": ad.I,
        "normC_sq": ad.normC_sq, "normI_sq": ad.normI_sq,
        "max_mixed_C": float(np.max(np.abs(mixed_entries(ad.C, pm.m)), initial=0.0)),
        "F_times_I_norm": nm.I_sup_integrand, "F_times_C_norm": nm.C_sup_integrand,
        "route_max_abs_C_difference": float(np.max(np.abs(ad.C - closed.C))),
    }


def _parse_vector(text: str) -> list[float]:
    return [float(v) for v in text.replace(" ", "").split(",") if v]


def cmd_eval(cfg: RunConfig, args) -> int:
    pm = cfg.product_metric
    if args.y_bar is not None or args.y_tilde is not None:
        if args.y_bar is None or args.y_tilde is None:
            raise ConfigError("give both --y-bar and --y-tilde")
        yb, yt = _parse_vector(args.y_bar), _parse_vector(args.y_tilde)
    elif cfg.point is not None:
        yb, yt = cfg.point
    else:
        raise ConfigError("eval needs a point: config 'point' or --y-bar/--y-tilde")
    if len(yb) != pm.m or len(yt) != pm.n:
        raise ConfigError(f"point must have {pm.m} + {pm.n} components")
    try:
        rec = eval_record(pm, TangentSample(yb, yt))
    except (MetricDomainError, InadmissiblePoint, JetDomainError) as exc:
        print(f"inadmissible point: {exc}", file=sys.stderr)
        return EXIT_POINT
    payload = {"schema_version": SCHEMA_VERSION, "package_version": __version__, "command": "eval",
               "config": cfg.echo(), "result": rec}
    row = {"sample_id": 0, **{k: rec[k] for k in ("K", "H", "delta", "normC_sq", "normI_sq", "max_mixed_C")}}
    out = _out_dir(cfg, args)
    if out is not None:
        (out / "eval.json").write_text(dumps(payload))
        (out / "eval.csv").write_text(_csv([row], SAMPLE_COLUMNS[:7]))
    if args.format == "json":
        sys.stdout.write(dumps(payload))
    elif args.format == "csv":
        sys.stdout.write(_csv([row], SAMPLE_COLUMNS[:7]))
    else:
        scalars = ["K", "H", "F2", "delta", "normC_sq", "normI_sq", "max_mixed_C", "F_times_I_norm",
                   "F_times_C_norm", "route_max_abs_C_difference"]
        print(_table([{"quantity": k, "value": rec[k]} for k in scalars], ["quantity", "value"]))
        print(_table([{"partial": k, "value": v} for k, v in rec["partials"].items()], ["partial", "value"]))
        for key in ("g", "g_inv", "I", "C", "C_closed"):
            print(_matrix_text(key, rec[key]))
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify

def sample_rows(pm: ProductMetric, samples, tolerances: dict) -> tuple[list[dict], int]:
    """Per-sample summaries; inadmissible samples are dropped and counted."""
    from .verify import DEFAULT_TOLERANCES

    tol = {**DEFAULT_TOLERANCES, **tolerances}
    rows, skipped = [], 0
    for sid, s in enumerate(samples):
        try:
            ev = ProductEvaluator(pm, s)
            _, g, C = ev.ad()
            C_cl = ev.cartan_closed()
        except (MetricDomainError, InadmissiblePoint, JetDomainError, np.linalg.LinAlgError):
            skipped += 1
            continue
        g_inv = np.linalg.inv(g[0])
        C0 = C[0]
        I = np.einsum("jk,ijk->i", g_inv, C0)
        fa, fb = ev.factor_fibers()
        I_split = np.concatenate([fa.I[0], fb.I[0]])
        I_scale = max(float(np.max(np.abs(I))), 1e-300)
        C_scale = float(np.max(np.abs(C0)))
        mixed = float(np.max(np.abs(mixed_entries(C0, pm.m)), initial=0.0))
        rows.append({
            "sample_id": sid, "y_bar": s.y_bar, "y_tilde": s.y_tilde,
            "K": float(ev.a.K[0]), "H": float(ev.b.K[0]), "delta": float(ev.p.delta[0]),
            "normC_sq": float(np.einsum("ijk,il,jm,kn,lmn->", C0, g_inv, g_inv, g_inv, C0)),
            "normI_sq": float(I @ g_inv @ I),
            "max_mixed_C": mixed,
            "mixed_C_zero": mixed <= tol["split_zero"],
            "I_splits": float(np.max(np.abs(I - I_split))) / I_scale <= tol["mean_split"],
            "routes_agree": float(np.max(np.abs(C_cl[0] - C0))) <= max(tol["route_rel"] * C_scale,
                                                                       tol["route_abs"]),
        })
    return rows, skipped


def build_report(cfg: RunConfig) -> dict:
    pm = cfg.product_metric
    spec = CheckSpec("verify", pm, cfg.plan, cfg.tolerances)
    reports = run_suite(spec)
    rows, skipped = sample_rows(pm, spec.samples(), cfg.tolerances)
    flags = ("mixed_C_zero", "I_splits", "routes_agree")
    samples = [{**{k: r[k] for k in r if k not in flags}, "flags": {f: r[f] for f in flags}} for r in rows]
    return {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "command": "verify",
        "config": cfg.echo(),
        "header": {"notes": REPORT_NOTES},
        "checks": [r.as_dict() for r in reports],
        "samples": samples,
        "summary": {
            "verdicts": dict(sorted(Counter(r.verdict for r in reports).items())),
            "failed": [r.check for r in reports if r.verdict == FAIL],
            "skipped_samples": skipped,
        },
    }


def cmd_verify(cfg: RunConfig, args) -> int:
    report = build_report(cfg)
    rows = [{**{k: s[k] for k in SAMPLE_COLUMNS[:7]}, **s["flags"]} for s in report["samples"]]
    out = _out_dir(cfg, args)
    if out is not None:
        (out / cfg.output("report", "report.json")).write_text(dumps(report))
        (out / cfg.output("samples_csv", "samples.csv")).write_text(_csv(rows, SAMPLE_COLUMNS))
    if args.format == "json":
        sys.stdout.write(dumps(report))
    elif args.format == "csv":
        sys.stdout.write(_csv(rows, SAMPLE_COLUMNS))
    else:
        table = [{"check": c["check"], "verdict": c["verdict"], "criterion": c["criterion"],
                  "max_residual": c["max_residual"], "tolerance": c["tolerance"], "skipped": c["skipped"]}
                 for c in report["checks"]]
        print(_table(table, ["check", "verdict", "criterion", "max_residual", "tolerance", "skipped"]))
        for c in report["checks"]:
            for note in c["notes"]:
                print(f"  {c['check']}: {note}")
    return EXIT_FAIL if report["summary"]["failed"] else EXIT_OK


# ---------------------------------------------------------------------------
# sweep

def sweep_rows(sweep: dict, seed: int) -> list[dict]:
    """Sampled sup-norms of Randers norms and Randers x Randers products over a (b, p) grid."""
    n = int(sweep.get("dim", 2))
    directions = int(sweep.get("directions", 4096))
    count = int(sweep.get("product_samples", 512))
    rows = []
    for b in sweep["b"]:
        metric = RandersMetric.with_norm(b, n)
        Y = unit_directions(n, directions, np.random.default_rng(seed))
        si, sc = sampled_sups(metric, Y)
        rows.append({"kind": "single", "n": n, "b": float(b), "p": None, "sup_I": si, "sup_C": sc,
                     "formula_I": randers_mean_norm_formula(n, b), "bound_C": randers_cartan_bound(b),
                     "window_bound_I": None, "window_bound_C": None})
    for b in sweep["b"]:
        for p in sweep.get("p", []):
            metric = RandersMetric.with_norm(b, n)
            pm = ProductMetric(metric, metric, LpProduct(p))
            samples = sample_tangents(n, n, SamplePlan(count, seed))
            si, sc, rmin, rmax = product_sups(pm, samples)
            row = {"kind": "product", "n": n, "b": float(b), "p": float(p), "sup_I": si, "sup_C": sc,
                   "formula_I": None, "bound_C": None, "window_bound_I": None, "window_bound_C": None}
            if pm.pf.is_linear:
                i1, c1 = factor_bounds(metric)
                row["window_bound_I"] = float(np.sqrt(i1 ** 2 * (2 + rmax + 1 / rmin)))
                row["window_bound_C"] = max(c1 * np.sqrt(1 + rmax), c1 * np.sqrt(1 + 1 / rmin))
            rows.append(row)
    return rows


def cmd_sweep(cfg: RunConfig, args) -> int:
    if cfg.sweep is None:
        raise ConfigError("sweep needs a 'sweep' section with a b grid")
    rows = sweep_rows(cfg.sweep, cfg.plan.seed)
    out = _out_dir(cfg, args)
    if out is not None:
        (out / cfg.output("sweep_csv", "sweep.csv")).write_text(_csv(rows, SWEEP_COLUMNS))
    if args.format == "json":
        sys.stdout.write(dumps({"schema_version": SCHEMA_VERSION, "command": "sweep", "config": cfg.echo(),
                                "rows": rows}))
    elif args.format == "csv":
        sys.stdout.write(_csv(rows, SWEEP_COLUMNS))
    else:
        print(_table(rows, SWEEP_COLUMNS))
    return EXIT_OK


# ---------------------------------------------------------------------------

def _out_dir(cfg: RunConfig, args) -> Path | None:
    d = args.out if args.out is not None else cfg.raw.get("outputs", {}).get("dir")
    if d is None:
        return None
    path = Path(d)
    path.mkdir(parents=True, exist_ok=True)
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="finsler-product", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run config")
    common.add_argument("--out", help="directory for report files (default: config outputs.dir, else none)")
    common.add_argument("--seed", type=int, help="override samples.seed")
    common.add_argument("--samples", type=int, help="override samples.count")
    common.add_argument("--format", choices=["json", "csv"], help="print machine-readable output instead of tables")
    sub = parser.add_subparsers(dest="command", required=True)
    ev = sub.add_parser("eval", parents=[common], help="tensors at one direction")
    ev.add_argument("--y-bar", help="first-factor component, comma separated")
    ev.add_argument("--y-tilde", help="second-factor component, comma separated")
    sub.add_parser("verify", parents=[common], help="run the verification suite")
    sub.add_parser("sweep", parents=[common], help="sup-norm sweep over Randers norms and product exponents")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None or args.samples is not None:
            if args.seed is not None and args.seed < 0:
                raise ConfigError("--seed must be non-negative")
            cfg = cfg.with_overrides(args.seed, args.samples)
        handler = {"eval": cmd_eval, "verify": cmd_verify, "sweep": cmd_sweep}[args.command]
        return handler(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
