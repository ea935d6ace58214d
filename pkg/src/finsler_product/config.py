"""Run configuration: parse, validate, echo."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .expr import ExpressionError
from .metrics import FinslerMetric, MetricError, RandersMetric, metric_from_dict
from .product import ProductFunction, ProductMetric, product_from_dict
from .schema import CONFIG_SCHEMA, SCHEMA_VERSION
from .verify import DEFAULT_TOLERANCES, SamplePlan, _clean


class ConfigError(ValueError):
    """The run configuration is structurally or semantically invalid."""


def _metric(d: dict, label: str) -> FinslerMetric:
    d = dict(d)
    if d["dim"] < 2:
        raise ConfigError(f"{label}: dimension must be at least 2 (got {d['dim']})")
    if "b_norm" in d:
        if d["family"] != "randers":
            raise ConfigError(f"{label}: b_norm only applies to the randers family")
        if "b" in d:
            raise ConfigError(f"{label}: give either b or b_norm, not both")
        if not 0 <= d["b_norm"] < 1:
            raise ConfigError(f"{label}: Randers b_norm must lie in [0, 1) (got {d['b_norm']})")
        return RandersMetric.with_norm(d["b_norm"], d["dim"], d.get("a"))
    if d["family"] == "custom" and "f2" not in d:
        raise ConfigError(f"{label}: custom metric needs an f2 expression")
    try:
        return metric_from_dict(d)
    except (MetricError, ExpressionError) as exc:
        raise ConfigError(f"{label}: {exc}") from None


@dataclass
class RunConfig:
    raw: dict
    factor1: FinslerMetric | None = None
    factor2: FinslerMetric | None = None
    product: ProductFunction | None = None
    plan: SamplePlan = field(default_factory=SamplePlan)
    tolerances: dict = field(default_factory=dict)

    @property
    def product_metric(self) -> ProductMetric:
        if self.factor1 is None or self.factor2 is None or self.product is None:
            raise ConfigError("config needs factor1, factor2 and product for this command")
        return ProductMetric(self.factor1, self.factor2, self.product)

    @property
    def point(self) -> tuple | None:
        p = self.raw.get("point")
        return None if p is None else (p["y_bar"], p["y_tilde"])

    @property
    def sweep(self) -> dict | None:
        return self.raw.get("sweep")

    def output(self, key: str, default: str) -> str:
        return self.raw.get("outputs", {}).get(key, default)

    def echo(self) -> dict:
        """Canonical JSON-ready form; ``parse_config(cfg.echo()).echo() == cfg.echo()``."""
        return copy.deepcopy(self.raw)

    def with_overrides(self, seed: int | None = None, count: int | None = None) -> "RunConfig":
        raw = copy.deepcopy(self.raw)
        s = raw.setdefault("samples", {})
        if seed is not None:
            s["seed"] = seed
        if count is not None:
            s["count"] = count
        return parse_config(raw)


def parse_config(data: dict) -> RunConfig:
    """Validate against the schema, then semantically; build metric objects."""
    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    raw = copy.deepcopy(data)
    raw.setdefault("schema_version", SCHEMA_VERSION)
    s = raw.setdefault("samples", {})
    s.setdefault("count", 50)
    s.setdefault("seed", 0)
    s["radius_range"] = [float(v) for v in s.get("radius_range", [0.1, 10.0])]
    try:
        plan = SamplePlan(s["count"], s["seed"], tuple(s["radius_range"]))
    except ValueError as exc:
        raise ConfigError(f"samples: {exc}") from None

    unknown = set(raw.get("tolerances", {})) - set(DEFAULT_TOLERANCES)
    if unknown:
        raise ConfigError(f"tolerances: unknown names {sorted(unknown)}")
    for k, v in raw.get("tolerances", {}).items():
        if not v >= 0:
            raise ConfigError(f"tolerances/{k}: must be non-negative")

    f1 = _metric(raw["factor1"], "factor1") if "factor1" in raw else None
    f2 = _metric(raw["factor2"], "factor2") if "factor2" in raw else None
    pf = None
    if "product" in raw:
        prod = raw["product"]
        if "lp" in prod and not prod["lp"] > 1:
            raise ConfigError(f"product: lp exponent must be > 1 (got {prod['lp']})")
        if "linear" in prod and not all(c > 0 for c in prod["linear"]):
            raise ConfigError("product: linear coefficients must be positive")
        try:
            pf = product_from_dict(prod)
        except (ValueError, ExpressionError) as exc:
            raise ConfigError(f"product: {exc}") from None

    if "point" in raw:
        for key, metric in (("y_bar", f1), ("y_tilde", f2)):
            if metric is not None and len(raw["point"][key]) != metric.dim:
                raise ConfigError(f"point/{key}: expected {metric.dim} components")
    if "sweep" in raw:
        sw = raw["sweep"]
        if any(not 0 <= b < 1 for b in sw["b"]):
            raise ConfigError("sweep/b: every Randers norm must lie in [0, 1)")
        if any(not p > 1 for p in sw.get("p", [])):
            raise ConfigError("sweep/p: every exponent must be > 1")
        if sw.get("dim", 2) < 2:
            raise ConfigError("sweep/dim: must be at least 2")
    return RunConfig(raw, f1, f2, pf, plan, dict(raw.get("tolerances", {})))


def load_config(path: str | Path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return parse_config(data)


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats, NaN/inf as null."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"
