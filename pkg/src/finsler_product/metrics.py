"""Factor Finsler metrics on a single tangent space.

Each metric freezes its coefficients at one base point and exposes ``f2``, the
squared norm as a field of the fibre coordinates. ``f2`` accepts a sequence of
components that may be floats, arrays or jets.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .expr import Expression
from .jets import derivative_tensors, sqrt


class MetricError(ValueError):
    """Invalid metric coefficients (not SPD, ||beta|| >= 1, bad dimension...)."""


class MetricDomainError(ValueError):
    """Metric evaluated outside its domain (zero vector, non-positive F^2)."""


def _spd(a, dim: int) -> np.ndarray:
    a = np.array(a, dtype=float)
    if a.shape != (dim, dim):
        raise MetricError(f"coefficient matrix must be {dim}x{dim}, got {a.shape}")
    if not np.allclose(a, a.T, rtol=0, atol=1e-14 * max(1.0, np.abs(a).max())):
        raise MetricError("coefficient matrix is not symmetric")
    a = 0.5 * (a + a.T)
    if np.linalg.eigvalsh(a).min() <= 0:
        raise MetricError("coefficient matrix is not positive definite")
    return a


def _quad(a: np.ndarray, ys: Sequence):
    n = len(ys)
    total = 0.0
    for i in range(n):
        row = a[i, i] * ys[i]
        for j in range(i + 1, n):
            if a[i, j] != 0.0:
                row = row + (2.0 * a[i, j]) * ys[j]
        total = total + ys[i] * row
    return total


class FinslerMetric:
    dim: int
    label: str = "metric"

    def f2(self, ys: Sequence):
        raise NotImplementedError

    def k_value(self, y) -> float:
        return k_value(self, y)

    @property
    def is_riemannian(self) -> bool:
        return False

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(eq=False)
class RiemannianMetric(FinslerMetric):
    dim: int
    a: np.ndarray = None
    label: str = "riemannian"

    def __post_init__(self):
        if self.dim < 1:
            raise MetricError("dimension must be positive")
        self.a = np.eye(self.dim) if self.a is None else _spd(self.a, self.dim)

    def f2(self, ys):
        return _quad(self.a, ys)

    @property
    def is_riemannian(self) -> bool:
        return True

    def describe(self) -> dict:
        return {"family": "riemannian", "dim": self.dim, "a": self.a.tolist()}


def euclidean(dim: int) -> RiemannianMetric:
    return RiemannianMetric(dim, label="euclidean")


@dataclass(eq=False)
class RandersMetric(FinslerMetric):
    """F = sqrt(a(y, y)) + b.y with ||b||_a < 1."""

    dim: int
    a: np.ndarray = None
    b: np.ndarray = None
    label: str = "randers"

    def __post_init__(self):
        self.a = np.eye(self.dim) if self.a is None else _spd(self.a, self.dim)
        self.b = np.zeros(self.dim) if self.b is None else np.array(self.b, dtype=float)
        if self.b.shape != (self.dim,):
            raise MetricError(f"covector must have length {self.dim}")
        if not self.b_norm < 1.0:
            raise MetricError(f"Randers covector norm {self.b_norm:.6g} must be < 1")

    @classmethod
    def with_norm(cls, b_norm: float, dim: int = 2, a=None, direction=None) -> "RandersMetric":
        """Randers metric whose covector has a-norm exactly ``b_norm``."""
        a = np.eye(dim) if a is None else np.array(a, dtype=float)
        d = np.eye(dim)[0] if direction is None else np.array(direction, dtype=float)
        unit = np.sqrt(d @ np.linalg.solve(a, d))
        return cls(dim, a, b_norm * d / unit)

    @property
    def b_norm(self) -> float:
        return float(np.sqrt(self.b @ np.linalg.solve(self.a, self.b)))

    @property
    def is_riemannian(self) -> bool:
        return not np.any(self.b)

    def f2(self, ys):
        beta = 0.0
        for bi, yi in zip(self.b, ys):
            if bi != 0.0:
                beta = beta + bi * yi
        F = sqrt(_quad(self.a, ys)) + beta
        return F * F

    def describe(self) -> dict:
        return {"family": "randers", "dim": self.dim, "a": self.a.tolist(), "b": self.b.tolist()}


@dataclass(eq=False)
class CustomMetric(FinslerMetric):
    """User-supplied F^2 as an expression in ``y1 .. yn``.

    Admissibility is not enforced here; see :func:`homogeneity_residual` and
    :func:`strong_convexity_check`.
    """

    dim: int
    source: str = ""
    label: str = "custom"
    _expr: Expression = field(init=False, repr=False)

    def __post_init__(self):
        names = frozenset(f"y{i + 1}" for i in range(self.dim))
        self._expr = Expression(self.source, names)

    def f2(self, ys):
        return self._expr.evaluate({f"y{i + 1}": v for i, v in enumerate(ys)})

    def describe(self) -> dict:
        return {"family": "custom", "dim": self.dim, "f2": self.source, "label": self.label}


@dataclass(frozen=True)
class TangentSample:
    """A direction y = (y_bar, y_tilde) with both factor components nonzero."""

    y_bar: np.ndarray
    y_tilde: np.ndarray

    def __post_init__(self):
        yb = np.array(self.y_bar, dtype=float)
        yt = np.array(self.y_tilde, dtype=float)
        if yb.ndim != 1 or yt.ndim != 1:
            raise ValueError("sample components must be vectors")
        if not np.any(yb):
            raise MetricDomainError("first factor component y_bar is zero")
        if not np.any(yt):
            raise MetricDomainError("second factor component y_tilde is zero")
        object.__setattr__(self, "y_bar", yb)
        object.__setattr__(self, "y_tilde", yt)

    @property
    def y(self) -> np.ndarray:
        return np.concatenate([self.y_bar, self.y_tilde])

    def scaled(self, lam: float) -> "TangentSample":
        return TangentSample(lam * self.y_bar, lam * self.y_tilde)


def k_value(metric: FinslerMetric, y) -> float:
    """F^2(y) for a nonzero y."""
    y = np.asarray(y, dtype=float)
    if y.shape != (metric.dim,):
        raise ValueError(f"expected a vector of length {metric.dim}")
    if not np.any(y):
        raise MetricDomainError("F^2 is evaluated at the zero vector")
    val = float(metric.f2(list(y)))
    if not val > 0:
        raise MetricDomainError(f"F^2 = {val!r} is not positive at y = {y.tolist()}")
    return val


@dataclass
class ConvexityReport:
    min_eigenvalues: list
    passed: bool

    @property
    def min_eigenvalue(self) -> float:
        return min(self.min_eigenvalues)


def strong_convexity_check(metric: FinslerMetric, samples) -> ConvexityReport:
    """Smallest eigenvalue of Hess(F^2 / 2) at every sample direction."""
    Y = np.atleast_2d(np.asarray(samples, dtype=float))
    if Y.shape[0] == 0:
        raise ValueError("need at least one sample")
    if np.any(~np.any(Y, axis=1)):
        raise MetricDomainError("zero vector in convexity samples")
    _, _, hess, _ = derivative_tensors(metric.f2, Y)
    eig = np.linalg.eigvalsh(0.5 * hess)[:, 0]
    return ConvexityReport(eig.tolist(), bool(np.all(eig > 0)))


def homogeneity_residual(metric: FinslerMetric, y, lambdas=(0.5, 2.0, 7.0)) -> float:
    """max relative |F^2(lam y) - lam^2 F^2(y)| over ``lambdas``."""
    base = float(metric.f2(list(np.asarray(y, dtype=float))))
    worst = 0.0
    for lam in lambdas:
        v = float(metric.f2(list(lam * np.asarray(y, dtype=float))))
        scale = abs(lam * lam * base)
        worst = max(worst, abs(v - lam * lam * base) / scale if scale else abs(v))
    return worst


def unit_directions(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal((count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def metric_from_dict(d: dict) -> FinslerMetric:
    family = d["family"]
    dim = int(d["dim"])
    if family == "euclidean":
        return euclidean(dim)
    if family == "riemannian":
        return RiemannianMetric(dim, d.get("a"))
    if family == "randers":
        return RandersMetric(dim, d.get("a"), d.get("b"))
    if family == "custom":
        return CustomMetric(dim, d["f2"], d.get("label", "custom"))
    raise MetricError(f"unknown metric family {family!r}")
