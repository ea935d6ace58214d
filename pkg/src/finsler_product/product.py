"""Product functions f(K, H) and the product metric F^2 = f(K(y_bar), H(y_tilde)).

Convention: in ``Linear(a, b)`` the first coefficient multiplies the squared norm
of the FIRST factor, f = a*K + b*H.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .expr import Expression
from .jets import Jet3, derivative_tensors
from .metrics import FinslerMetric, MetricDomainError, TangentSample, k_value


class InadmissiblePoint(ValueError):
    """The product function degenerates at (K, H): Delta ~ 0 or outside (0, inf)^2."""


@dataclass(frozen=True)
class FPartials:
    f: float
    fK: float
    fH: float
    fKK: float
    fKH: float
    fHH: float
    fKKK: float
    fKKH: float
    fKHH: float
    fHHH: float

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in fields(self)], dtype=float)


PARTIAL_NAMES = tuple(f.name for f in fields(FPartials))


def _check_domain(s, t):
    if np.any(np.asarray(s) <= 0) or np.any(np.asarray(t) <= 0):
        raise InadmissiblePoint(f"product function needs s, t > 0 (got s={s!r}, t={t!r})")


class ProductFunction:
    kind: str = "custom"

    def __call__(self, s, t):
        raise NotImplementedError

    def partials(self, s, t) -> FPartials:
        """f and its nine partials through order 3, by jets (exact to rounding)."""
        _check_domain(s, t)
        _, g, h, c = derivative_tensors(lambda v: self(v[0], v[1]), np.array([s, t], dtype=float))
        return FPartials(float(self(float(s), float(t))), g[0], g[1], h[0, 0], h[0, 1], h[1, 1],
                         c[0, 0, 0], c[0, 0, 1], c[0, 1, 1], c[1, 1, 1])

    @property
    def is_linear(self) -> bool:
        return False

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Linear(ProductFunction):
    a: float = 1.0
    b: float = 1.0
    kind = "linear"

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("linear product coefficients must be positive")

    def __call__(self, s, t):
        return self.a * s + self.b * t

    def partials(self, s, t) -> FPartials:
        _check_domain(s, t)
        return FPartials(self.a * s + self.b * t, self.a, self.b, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    @property
    def is_linear(self) -> bool:
        return True

    def describe(self) -> dict:
        return {"linear": [self.a, self.b]}


@dataclass(frozen=True)
class LpProduct(ProductFunction):
    """f = (s^q + t^q)^(1/q), q = p/2, so that F = (F1^p + F2^p)^(1/p)."""

    p: float = 4.0
    kind = "lp"

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError("L^p product needs p > 1")

    @property
    def q(self) -> float:
        return self.p / 2.0

    def __call__(self, s, t):
        q = self.q
        if q == 1.0:
            return s + t
        return (s ** q + t ** q) ** (1.0 / q)

    def partials(self, s, t) -> FPartials:
        _check_domain(s, t)
        s, t, q = float(s), float(t), self.q
        if q == 1.0:
            return Linear(1.0, 1.0).partials(s, t)
        sq, tq = s ** q, t ** q
        u = sq + tq
        r = 1.0 / q
        f = u ** r
        fK = u ** (r - 1) * s ** (q - 1)
        fH = u ** (r - 1) * t ** (q - 1)
        w2 = (q - 1) * u ** (r - 2)
        fKK = w2 * s ** (q - 2) * tq
        fKH = -w2 * s ** (q - 1) * t ** (q - 1)
        fHH = w2 * t ** (q - 2) * sq
        w3 = (q - 1) * u ** (r - 3)
        fKKK = w3 * tq * s ** (q - 3) * ((-1 - q) * sq + (q - 2) * tq)
        fKKH = w3 * s ** (q - 2) * t ** (q - 1) * (q * sq + (1 - q) * tq)
        fKHH = w3 * t ** (q - 2) * s ** (q - 1) * (q * tq + (1 - q) * sq)
        fHHH = w3 * sq * t ** (q - 3) * ((-1 - q) * tq + (q - 2) * sq)
        return FPartials(f, fK, fH, fKK, fKH, fHH, fKKK, fKKH, fKHH, fHHH)

    @property
    def is_linear(self) -> bool:
        return self.q == 1.0

    def describe(self) -> dict:
        return {"lp": self.p}


@dataclass(frozen=True)
class CustomProduct(ProductFunction):
    """f given as an expression in ``K`` and ``H`` (``s``/``t`` also accepted)."""

    source: str = "K + H"
    kind = "custom"

    def __post_init__(self):
        object.__setattr__(self, "_expr", Expression(self.source, frozenset({"K", "H", "s", "t"})))

    def __call__(self, s, t):
        return self._expr.evaluate({"K": s, "H": t, "s": s, "t": t})

    def describe(self) -> dict:
        return {"custom": self.source}


def product_from_dict(d: dict) -> ProductFunction:
    if "linear" in d:
        a, b = d["linear"]
        return Linear(float(a), float(b))
    if "lp" in d:
        return LpProduct(float(d["lp"]))
    if "custom" in d:
        return CustomProduct(d["custom"])
    raise ValueError(f"unknown product specification {d!r}")


# ---------------------------------------------------------------------------

def partials(pf: ProductFunction, s: float, t: float) -> FPartials:
    return pf.partials(s, t)


DELTA_RTOL = 1e-12


def delta_from(fp: FPartials) -> float:
    d = fp.fK * fp.fH - 2.0 * fp.f * fp.fKH
    scale = abs(fp.fK * fp.fH) + abs(2.0 * fp.f * fp.fKH)
    if abs(d) < DELTA_RTOL * scale or d == 0.0:
        raise InadmissiblePoint(f"Delta = {d!r} vanishes (fK fH - 2 f fKH)")
    return d


def delta(pf: ProductFunction, s: float, t: float) -> float:
    """Delta = fK fH - 2 f fKH, rejected when it cancels to rounding level."""
    return delta_from(pf.partials(s, t))


def _normalized(terms) -> float:
    num = abs(sum(terms))
    den = sum(abs(x) for x in terms)
    return num / den if den > 0 else 0.0


def euler_residuals(pf: ProductFunction, s: float, t: float) -> tuple[float, float, float, float]:
    """The four identities forced by 1-homogeneity, each normalized by its terms.

    fK K + fH H - f,  fKK K + fKH H,  fHK K + fHH H,  fKH^2 - fKK fHH.
    """
    p = pf.partials(s, t)
    return (
        _normalized([p.fK * s, p.fH * t, -p.f]),
        _normalized([p.fKK * s, p.fKH * t]),
        _normalized([p.fKH * s, p.fHH * t]),
        _normalized([p.fKH ** 2, -p.fKK * p.fHH]),
    )


@dataclass
class AdmissibilityReport:
    conditions: dict  # condition letter -> bool
    worst: dict       # condition letter -> worst measured quantity
    grid_points: int

    @property
    def passed(self) -> bool:
        return all(self.conditions.values())

    def as_dict(self) -> dict:
        return {"passed": self.passed, "conditions": self.conditions, "worst": self.worst,
                "grid_points": self.grid_points}


def admissibility(pf: ProductFunction, n: int = 16, lo: float = 1e-2, hi: float = 1e2,
                  lambdas=(0.5, 2.0), hom_tol: float = 1e-10) -> AdmissibilityReport:
    """Sample conditions (a)-(e) on an n x n log grid over (lo, hi)^2."""
    grid = np.geomspace(lo, hi, n)
    ok = {c: True for c in "abcde"}
    worst = {"a": math.inf, "b": 0.0, "c": 0.0, "d": math.inf, "e": math.inf}
    try:
        zero = float(pf(0.0, 0.0))
        if zero != 0.0:
            ok["a"] = False
    except (ValueError, ZeroDivisionError):
        pass  # f(0,0) not expressible as a finite evaluation; positivity still sampled
    for s in grid:
        for t in grid:
            try:
                p = pf.partials(s, t)
            except (ValueError, ZeroDivisionError, FloatingPointError):
                ok["c"] = False
                continue
            vals = p.as_array()
            if not np.all(np.isfinite(vals)):
                ok["c"] = False
                worst["c"] = math.inf
                continue
            worst["a"] = min(worst["a"], p.f)
            if not p.f > 0:
                ok["a"] = False
            for lam in lambdas:
                r = abs(float(pf(lam * s, lam * t)) - lam * p.f) / abs(lam * p.f) if p.f else math.inf
                worst["b"] = max(worst["b"], r)
                if not r <= hom_tol:
                    ok["b"] = False
            dmin = min(abs(p.fK), abs(p.fH))
            worst["d"] = min(worst["d"], dmin)
            if dmin == 0:
                ok["d"] = False
            d = p.fK * p.fH - 2.0 * p.f * p.fKH
            scale = abs(p.fK * p.fH) + abs(2.0 * p.f * p.fKH)
            rel = abs(d) / scale if scale else 0.0
            worst["e"] = min(worst["e"], rel)
            if rel < DELTA_RTOL:
                ok["e"] = False
    return AdmissibilityReport(ok, worst, n * n)


# ---------------------------------------------------------------------------

@dataclass(eq=False)
class ProductMetric:
    factor1: FinslerMetric
    factor2: FinslerMetric
    pf: ProductFunction

    @property
    def m(self) -> int:
        return self.factor1.dim

    @property
    def n(self) -> int:
        return self.factor2.dim

    @property
    def dim(self) -> int:
        return self.m + self.n

    def f2(self, ys):
        m = self.m
        return self.pf(self.factor1.f2(ys[:m]), self.factor2.f2(ys[m:]))

    def split(self, y) -> TangentSample:
        y = np.asarray(y, dtype=float)
        return TangentSample(y[: self.m], y[self.m:])

    def describe(self) -> dict:
        return {"factor1": self.factor1.describe(), "factor2": self.factor2.describe(),
                "product": self.pf.describe()}


def product_f2(pm: ProductMetric, y: TangentSample) -> float:
    """F^2 = f(K, H) on M' (both components nonzero)."""
    if not isinstance(y, TangentSample):
        y = pm.split(y)
    try:
        K = k_value(pm.factor1, y.y_bar)
    except MetricDomainError as exc:
        raise MetricDomainError(f"factor 1: {exc}") from None
    try:
        H = k_value(pm.factor2, y.y_tilde)
    except MetricDomainError as exc:
        raise MetricDomainError(f"factor 2: {exc}") from None
    val = pm.pf(K, H)
    return float(val.value if isinstance(val, Jet3) else val)
