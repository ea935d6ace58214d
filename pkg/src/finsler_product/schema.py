"""JSON schemas for run configs and report files (published copies live in docs/)."""

SCHEMA_VERSION = 1

_MATRIX = {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}
_VECTOR = {"type": "array", "items": {"type": "number"}}

METRIC_SCHEMA = {
    "type": "object",
    "required": ["family", "dim"],
    "properties": {
        "family": {"enum": ["euclidean", "riemannian", "randers", "custom"]},
        "dim": {"type": "integer"},
        "a": _MATRIX,
        "b": _VECTOR,
        "b_norm": {"type": "number"},
        "f2": {"type": "string"},
        "label": {"type": "string"},
    },
    "additionalProperties": False,
}

PRODUCT_SCHEMA = {
    "oneOf": [
        {"type": "object", "required": ["linear"], "additionalProperties": False,
         "properties": {"linear": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}}},
        {"type": "object", "required": ["lp"], "additionalProperties": False,
         "properties": {"lp": {"type": "number"}}},
        {"type": "object", "required": ["custom"], "additionalProperties": False,
         "properties": {"custom": {"type": "string"}}},
    ]
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "finsler-product run config",
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "factor1": METRIC_SCHEMA,
        "factor2": METRIC_SCHEMA,
        "product": PRODUCT_SCHEMA,
        "samples": {
            "type": "object",
            "properties": {
                "count": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "radius_range": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            },
            "additionalProperties": False,
        },
        "tolerances": {"type": "object", "additionalProperties": {"type": "number"}},
        "point": {
            "type": "object",
            "required": ["y_bar", "y_tilde"],
            "properties": {"y_bar": _VECTOR, "y_tilde": _VECTOR},
            "additionalProperties": False,
        },
        "sweep": {
            "type": "object",
            "required": ["b"],
            "properties": {
                "b": _VECTOR,
                "p": _VECTOR,
                "dim": {"type": "integer"},
                "directions": {"type": "integer", "minimum": 1},
                "product_samples": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "outputs": {
            "type": "object",
            "properties": {
                "dir": {"type": "string"},
                "report": {"type": "string"},
                "samples_csv": {"type": "string"},
                "sweep_csv": {"type": "string"},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

_CHECK = {
    "type": "object",
    "required": ["check", "provenance", "verdict", "criterion", "max_residual", "tolerance",
                 "residuals", "measured", "skipped", "notes"],
    "properties": {
        "check": {"type": "string"},
        "provenance": {"type": "string"},
        "verdict": {"enum": ["PASS", "FAIL", "RECONCILE", "PASS-VACUOUS"]},
        "criterion": {"enum": ["max<=tol", "witness>tol"]},
        "max_residual": {"type": ["number", "null"]},
        "tolerance": {"type": "number"},
        "residuals": {"type": "array", "items": {"type": ["number", "null"]}},
        "measured": {"type": "object"},
        "skipped": {"type": "integer", "minimum": 0},
        "notes": {"type": "array", "items": {"type": "string"}},
    },
}

_SAMPLE_ROW = {
    "type": "object",
    "required": ["sample_id", "y_bar", "y_tilde", "K", "H", "delta", "normC_sq", "normI_sq", "max_mixed_C",
                 "flags"],
    "properties": {
        "sample_id": {"type": "integer"},
        "y_bar": _VECTOR,
        "y_tilde": _VECTOR,
        "K": {"type": "number"},
        "H": {"type": "number"},
        "delta": {"type": "number"},
        "normC_sq": {"type": "number"},
        "normI_sq": {"type": "number"},
        "max_mixed_C": {"type": "number"},
        "flags": {"type": "object", "additionalProperties": {"type": "boolean"}},
    },
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "finsler-product verification report",
    "type": "object",
    "required": ["schema_version", "package_version", "command", "config", "header", "checks", "samples",
                 "summary"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "package_version": {"type": "string"},
        "command": {"const": "verify"},
        "config": {"type": "object"},
        "header": {"type": "object", "properties": {"notes": {"type": "array", "items": {"type": "string"}}}},
        "checks": {"type": "array", "items": _CHECK},
        "samples": {"type": "array", "items": _SAMPLE_ROW},
        "summary": {
            "type": "object",
            "required": ["verdicts", "failed", "skipped_samples"],
            "properties": {
                "verdicts": {"type": "object", "additionalProperties": {"type": "integer"}},
                "failed": {"type": "array", "items": {"type": "string"}},
                "skipped_samples": {"type": "integer"},
            },
        },
    },
}
