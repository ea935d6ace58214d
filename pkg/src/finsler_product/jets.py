"""Third-order forward-mode differentiation on three nilpotent generators.

A :class:`Jet3` is a truncated polynomial in ``t1, t2, t3`` with ``ti**2 == 0``.
Its eight coefficients are the value and the mixed partials of a function along
three seed directions, so one evaluation of a field yields everything needed for
a gradient entry, a Hessian entry and a third-derivative entry at once.

Coefficients may be numpy arrays; every operation broadcasts, which is how whole
batches of seed triples (and base points) are pushed through a field in a single
pass.
"""
from __future__ import annotations

import itertools
import math
from typing import Callable, Sequence

import numpy as np

# storage order of the eight coefficients
C0, C1, C2, C3, C12, C13, C23, C123 = range(8)


class JetDomainError(ValueError):
    """Raised when a jet operation leaves the domain of the field (x/0, sqrt(<0))."""


def _as_array(x):
    return np.asarray(x, dtype=float)


class Jet3:
    __slots__ = ("c",)
    __array_priority__ = 100  # keep numpy scalars from hijacking reflected ops

    def __init__(self, c0=0.0, c1=0.0, c2=0.0, c3=0.0, c12=0.0, c13=0.0, c23=0.0, c123=0.0):
        self.c = np.stack(np.broadcast_arrays(*map(_as_array, (c0, c1, c2, c3, c12, c13, c23, c123))))

    @classmethod
    def _wrap(cls, arr) -> "Jet3":
        out = cls.__new__(cls)
        out.c = arr
        return out

    @classmethod
    def constant(cls, value) -> "Jet3":
        return cls(value)

    # named coefficient access
    c0 = property(lambda self: self.c[C0])
    c1 = property(lambda self: self.c[C1])
    c2 = property(lambda self: self.c[C2])
    c3 = property(lambda self: self.c[C3])
    c12 = property(lambda self: self.c[C12])
    c13 = property(lambda self: self.c[C13])
    c23 = property(lambda self: self.c[C23])
    c123 = property(lambda self: self.c[C123])

    @property
    def value(self):
        return self.c[C0]

    def coefficients(self) -> tuple:
        return tuple(self.c)

    def __repr__(self) -> str:
        names = ("c0", "c1", "c2", "c3", "c12", "c13", "c23", "c123")
        body = ", ".join(f"{n}={v!r}" for n, v in zip(names, self.c.tolist()))
        return f"Jet3({body})"

    # ---- ring operations -------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Jet3):
            return Jet3._wrap(self.c + other.c)
        other = _as_array(other)
        out = np.array(np.broadcast_to(self.c, np.broadcast_shapes(self.c.shape, (1,) + other.shape)))
        out[C0] += other
        return Jet3._wrap(out)

    __radd__ = __add__

    def __neg__(self):
        return Jet3._wrap(-self.c)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet3):
            return Jet3._wrap(self.c * _as_array(other))
        a, b = self.c, other.c
        p = np.empty(np.broadcast_shapes(a.shape, b.shape))
        p[C0] = a[C0] * b[C0]
        p[C1] = a[C0] * b[C1] + a[C1] * b[C0]
        p[C2] = a[C0] * b[C2] + a[C2] * b[C0]
        p[C3] = a[C0] * b[C3] + a[C3] * b[C0]
        p[C12] = a[C0] * b[C12] + a[C1] * b[C2] + a[C2] * b[C1] + a[C12] * b[C0]
        p[C13] = a[C0] * b[C13] + a[C1] * b[C3] + a[C3] * b[C1] + a[C13] * b[C0]
        p[C23] = a[C0] * b[C23] + a[C2] * b[C3] + a[C3] * b[C2] + a[C23] * b[C0]
        p[C123] = (a[C0] * b[C123] + a[C1] * b[C23] + a[C2] * b[C13] + a[C3] * b[C12]
                   + a[C12] * b[C3] + a[C13] * b[C2] + a[C23] * b[C1] + a[C123] * b[C0])
        return Jet3._wrap(p)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet3":
        x0 = self.c[C0]
        if np.any(x0 == 0):
            raise JetDomainError("division by a jet with zero value")
        inv = 1.0 / x0
        return self._chain(inv, -inv * inv, 2.0 * inv ** 3, -6.0 * inv ** 4)

    def __truediv__(self, other):
        if isinstance(other, Jet3):
            return self * other.reciprocal()
        other = _as_array(other)
        if np.any(other == 0):
            raise JetDomainError("division by zero")
        return Jet3._wrap(self.c / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, r):
        if isinstance(r, Jet3):
            raise TypeError("jet exponents are not supported; only real powers of a jet")
        r = float(r)
        if r.is_integer():
            n = int(r)
            if n < 0:
                return (self ** (-n)).reciprocal()
            return _int_power(self, n)
        x0 = self.c[C0]
        if np.any(x0 <= 0):
            raise JetDomainError(f"fractional power {r} of a non-positive jet value")
        return self._chain(x0 ** r, r * x0 ** (r - 1), r * (r - 1) * x0 ** (r - 2),
                           r * (r - 1) * (r - 2) * x0 ** (r - 3))

    def sqrt(self) -> "Jet3":
        return self ** 0.5

    def _chain(self, d0, d1, d2, d3) -> "Jet3":
        """Compose with a scalar function whose derivatives at c0 are d0..d3."""
        x = self.c
        p = np.empty(np.broadcast_shapes(x.shape, np.shape(d0)))
        p[C0] = d0
        p[C1] = d1 * x[C1]
        p[C2] = d1 * x[C2]
        p[C3] = d1 * x[C3]
        p[C12] = d1 * x[C12] + d2 * x[C1] * x[C2]
        p[C13] = d1 * x[C13] + d2 * x[C1] * x[C3]
        p[C23] = d1 * x[C23] + d2 * x[C2] * x[C3]
        p[C123] = (d1 * x[C123] + d2 * (x[C1] * x[C23] + x[C2] * x[C13] + x[C3] * x[C12])
                   + d3 * x[C1] * x[C2] * x[C3])
        return Jet3._wrap(p)


def _int_power(x: Jet3, n: int) -> Jet3:
    result = None
    base = x
    while n:
        if n & 1:
            result = base if result is None else result * base
        n >>= 1
        if n:
            base = base * base
    if result is None:
        return Jet3._wrap(np.zeros_like(x.c)) + 1.0
    return result


def sqrt(x):
    """sqrt that works on jets and on plain floats/arrays."""
    if isinstance(x, Jet3):
        return x.sqrt()
    return np.sqrt(x)


def value_of(x):
    return x.value if isinstance(x, Jet3) else x


# ---------------------------------------------------------------------------
# evaluation helpers

Field = Callable[[Sequence], object]


def jet_variables(y, d1, d2, d3) -> list:
    """Components ``y_k + t1 d1_k + t2 d2_k + t3 d3_k`` as jets.

    ``y`` has shape ``(n, ...)``; the seeds broadcast against it along the
    trailing axes.
    """
    y = _as_array(y)
    return [Jet3(y[k], d1[k], d2[k], d3[k]) for k in range(y.shape[0])]


def jet_eval(field: Field, y, dirs) -> Jet3:
    """Value and mixed partials of ``field`` at ``y`` along the three ``dirs``."""
    y = _as_array(y)
    d1, d2, d3 = (_as_array(d) for d in dirs)
    if not (d1.shape == d2.shape == d3.shape == y.shape):
        raise ValueError("seed directions must match the shape of y")
    out = field(jet_variables(y, d1, d2, d3))
    if not isinstance(out, Jet3):
        out = Jet3(out)
    return out


def symmetric_triples(n: int) -> list[tuple[int, int, int]]:
    return list(itertools.combinations_with_replacement(range(n), 3))


def derivative_tensors(field: Field, y):
    """Value, gradient, Hessian and third-derivative tensor of ``field``.

    ``y`` is ``(n,)`` or a batch ``(S, n)``. All outputs carry the same leading
    batch axis as ``y``. One batched jet pass covers every index multiset.
    """
    y = _as_array(y)
    single = y.ndim == 1
    Y = y[None, :] if single else y
    S, n = Y.shape
    triples = symmetric_triples(n)
    T = len(triples)
    eye = np.eye(n)
    seeds = [np.array([eye[t[slot]] for t in triples]).T for slot in range(3)]  # (n, T)
    base = Y.T[:, :, None]  # (n, S, 1)
    jets = [Jet3(base[k], seeds[0][k][None, :], seeds[1][k][None, :], seeds[2][k][None, :]) for k in range(n)]
    out = field(jets)
    if not isinstance(out, Jet3):
        out = Jet3(out)
    c = np.broadcast_to(out.c, (8, S, T))

    value = c[C0][:, 0].copy()
    grad = np.empty((S, n))
    hess = np.empty((S, n, n))
    third = np.empty((S, n, n, n))
    for idx, (i, j, k) in enumerate(triples):
        grad[:, i] = c[C1][:, idx]
        grad[:, k] = c[C3][:, idx]
        hess[:, i, j] = hess[:, j, i] = c[C12][:, idx]
        hess[:, i, k] = hess[:, k, i] = c[C13][:, idx]
        hess[:, j, k] = hess[:, k, j] = c[C23][:, idx]
        val = c[C123][:, idx]
        for p in set(itertools.permutations((i, j, k))):
            third[(slice(None),) + p] = val
    if single:
        return value[0], grad[0], hess[0], third[0]
    return value, grad, hess, third


# ---------------------------------------------------------------------------
# finite-difference oracle

def default_fd_step(y) -> float:
    return 1e-3 * max(1.0, float(np.max(np.abs(y))))


def _fd_stencil(field: Field, y: np.ndarray, i: int, j: int, k: int, h: float) -> float:
    n = y.shape[0]
    eye = np.eye(n)
    total = 0.0
    for s in itertools.product((1.0, -1.0), repeat=3):
        point = y + h * (s[0] * eye[i] + s[1] * eye[j] + s[2] * eye[k])
        v = float(field(list(point)))
        if not math.isfinite(v):
            raise JetDomainError(f"non-finite field value inside the stencil at {point.tolist()}")
        total += s[0] * s[1] * s[2] * v
    return total / (8.0 * h ** 3)


def fd_third(field: Field, y, i: int, j: int, k: int, step: float | None = None,
             richardson: bool = True) -> float:
    """Central-difference estimate of d3 field / dy_i dy_j dy_k.

    The eight-point product stencil has O(step**2) error. With ``richardson`` the
    estimates at ``step`` and ``2*step`` are combined to cancel the leading term.
    """
    y = _as_array(y)
    h = default_fd_step(y) if step is None else float(step)
    if h <= 0:
        raise ValueError("step must be positive")
    d_h = _fd_stencil(field, y, i, j, k, h)
    if not richardson:
        return d_h
    d_2h = _fd_stencil(field, y, i, j, k, 2.0 * h)
    return (4.0 * d_h - d_2h) / 3.0
