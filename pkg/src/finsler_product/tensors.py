"""Fundamental tensor, Cartan torsion and mean Cartan torsion of a product metric.

Two independent routes produce every quantity:

* ``"ad"``: jets applied directly to F^2 = f(K, H); g = Hess(F^2)/2, C = D^3(F^2)/4.
* ``"closed"``: block formulas in the factor derivatives K_i, K_ij, K_ijl,
  H_i', H_i'j', H_i'j'l' and the partials of f.

The block formulas are written for the raw derivatives of f(K, H), i.e. without
the 1/2 of g and the 1/4 of C. One normalization constant per formula family maps
them onto the AD conventions; the constants are frozen below and re-derived by
:func:`calibrate_normalizations` in the test-suite.

All array functions accept an optional leading batch axis.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .jets import derivative_tensors
from .metrics import FinslerMetric, TangentSample
from .product import (
    FPartials,
    InadmissiblePoint,
    Linear,
    LpProduct,
    ProductMetric,
    delta_from,
)

# closed block formula -> AD convention
G_NORMALIZATION = 0.5
GINV_NORMALIZATION = 2.0
CARTAN_NORMALIZATION = 0.5


# ---------------------------------------------------------------------------
# single-metric tensors

@dataclass
class FiberTensors:
    """Tensors of one Finsler metric at a batch of directions (leading axis S)."""

    F2: np.ndarray
    grad: np.ndarray
    hess: np.ndarray
    third: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    C: np.ndarray
    I: np.ndarray

    @property
    def F(self) -> np.ndarray:
        return np.sqrt(self.F2)

    @property
    def normC_sq(self) -> np.ndarray:
        return contraction_norm_sq(self.C, self.g_inv)

    @property
    def normI_sq(self) -> np.ndarray:
        return np.einsum("...i,...ij,...j->...", self.I, self.g_inv, self.I)


def fiber_tensors(metric: FinslerMetric, Y) -> FiberTensors:
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    F2, grad, hess, third = derivative_tensors(metric.f2, Y)
    g = 0.5 * hess
    g_inv = np.linalg.inv(g)
    C = 0.25 * third
    return FiberTensors(F2, grad, hess, third, g, g_inv, C, mean_cartan(g_inv, C))


# ---------------------------------------------------------------------------
# contractions

def mean_cartan(g_inv, C) -> np.ndarray:
    """I_a = g^{bc} C_abc."""
    return np.einsum("...bc,...abc->...a", g_inv, C)


def contraction_norm_sq(C, g_inv) -> np.ndarray:
    """C_ijk C^ijk with all three indices raised by g_inv."""
    return np.einsum("...ip,...jq,...kr,...ijk,...pqr->...", g_inv, g_inv, g_inv, C, C)


def _orthonormal_components(C, g):
    L = np.linalg.cholesky(g)
    M = np.swapaxes(np.linalg.inv(L), -1, -2)
    return np.einsum("...ijk,...ia,...jb,...kc->...abc", C, M, M, M), M


def cartan_spectral_norm(C, g, extra_starts=None, iterations: int = 400) -> np.ndarray:
    """max |C(u,u,u)| over g-unit u, a lower bound found by shifted power iteration.

    For a symmetric trilinear form this equals the sup over independent unit
    (u, v, w). Every returned value is attained by an explicit unit vector, so the
    result never overshoots the true norm. ``extra_starts`` (covectors, e.g. I) seed
    additional starting directions.
    """
    C = np.asarray(C, dtype=float)
    single = C.ndim == 3
    if single:
        C, g = C[None], np.asarray(g)[None]
        if extra_starts is not None:
            extra_starts = np.asarray(extra_starts)[None]
    T, M = _orthonormal_components(C, g)
    S, N = T.shape[0], T.shape[1]
    eye = np.eye(N)
    starts = [np.broadcast_to(e, (S, N)) for e in eye]
    starts.append(np.broadcast_to(np.ones(N) / math.sqrt(N), (S, N)))
    if extra_starts is not None:
        # covector I -> orthonormal components M^T I
        v = np.einsum("...ia,...i->...a", M, extra_starts)
        starts.append(v)
    V = np.stack(starts, axis=1)  # (S, P, N)
    norms = np.linalg.norm(V, axis=-1, keepdims=True)
    V = np.where(norms > 0, V / np.where(norms > 0, norms, 1.0), eye[0])
    # T(v,v,v) is odd, so |T| is maximised by maximising T itself
    Tm = T.reshape(S, N, N * N).transpose(0, 2, 1)  # (S, N^2, N)
    frob = np.sqrt(np.einsum("sabc,sabc->s", T, T))
    alpha = np.where(frob > 0, 2.0 * frob, 1.0)[:, None, None]

    def grad_at(V):
        VV = (V[:, :, :, None] * V[:, :, None, :]).reshape(S, V.shape[1], N * N)
        return VV @ Tm  # T(., v, v)

    grad = grad_at(V)
    best = np.abs(np.sum(grad * V, axis=-1))
    for _ in range(iterations):
        W = grad + alpha * V
        V_new = W / np.linalg.norm(W, axis=-1, keepdims=True)
        grad = grad_at(V_new)
        best = np.maximum(best, np.abs(np.sum(grad * V_new, axis=-1)))
        done = np.max(np.abs(V_new - V)) < 1e-13
        V = V_new
        if done:
            break
    out = best.max(axis=1)
    return out[0] if single else out


# ---------------------------------------------------------------------------
# product tensors

@dataclass
class BlockMatrix:
    """A 2x2 block matrix split along the factor boundary."""

    aa: np.ndarray
    ab: np.ndarray
    ba: np.ndarray
    bb: np.ndarray

    def full(self) -> np.ndarray:
        top = np.concatenate([self.aa, self.ab], axis=-1)
        bottom = np.concatenate([self.ba, self.bb], axis=-1)
        return np.concatenate([top, bottom], axis=-2)

    def scaled(self, c: float) -> "BlockMatrix":
        return BlockMatrix(c * self.aa, c * self.ab, c * self.ba, c * self.bb)


@dataclass
class _FactorData:
    K: np.ndarray
    K1: np.ndarray
    K2: np.ndarray
    K3: np.ndarray
    y: np.ndarray


def _factor_data(metric: FinslerMetric, Y) -> _FactorData:
    K, K1, K2, K3 = derivative_tensors(metric.f2, Y)
    return _FactorData(K, K1, K2, K3, np.asarray(Y, dtype=float))


def _as_batch(pm: ProductMetric, y):
    """Normalize a sample (TangentSample, vector, list of samples or (S, N) array) to (S, N)."""
    if isinstance(y, TangentSample):
        return y.y[None], True
    if isinstance(y, (list, tuple)) and y and isinstance(y[0], TangentSample):
        return np.array([s.y for s in y]), False
    Y = np.asarray(y, dtype=float)
    if Y.ndim == 1:
        pm.split(Y)  # validates M'
        return Y[None], True
    for row in Y:
        pm.split(row)
    return Y, False


class _Partials:
    """Column-wise f-partials for a batch of (K, H)."""

    def __init__(self, pf, K, H):
        rows = [pf.partials(float(k), float(h)) for k, h in zip(K, H)]
        self.rows = rows
        arr = np.array([r.as_array() for r in rows])
        (self.f, self.fK, self.fH, self.fKK, self.fKH, self.fHH,
         self.fKKK, self.fKKH, self.fKHH, self.fHHH) = arr.T
        self.delta = np.array([delta_from(r) for r in rows])


def _bouter(a, b):
    """Batched outer product of (S, p) and (S, q) -> (S, p, q)."""
    return a[:, :, None] * b[:, None, :]


def _bouter3(a, b, c):
    return a[:, :, None, None] * b[:, None, :, None] * c[:, None, None, :]


def _col(x):
    return x[:, None, None]


def _col3(x):
    return x[:, None, None, None]


class ProductEvaluator:
    """Factor derivatives and f-partials for a batch of samples of one product metric."""

    def __init__(self, pm: ProductMetric, y):
        self.pm = pm
        Y, self.single = _as_batch(pm, y)
        self.Y = Y
        m = pm.m
        self.a = _factor_data(pm.factor1, Y[:, :m])
        self.b = _factor_data(pm.factor2, Y[:, m:])
        if np.any(self.a.K <= 0) or np.any(self.b.K <= 0):
            raise InadmissiblePoint("a factor squared norm is not positive")
        self.p = _Partials(pm.pf, self.a.K, self.b.K)

    # -- closed-form blocks (raw derivatives of f(K, H)) ---------------------
    def raw_g_blocks(self) -> BlockMatrix:
        a, b, p = self.a, self.b, self.p
        return BlockMatrix(
            _col(p.fK) * a.K2 + _col(p.fKK) * _bouter(a.K1, a.K1),
            _col(p.fKH) * _bouter(a.K1, b.K1),
            _col(p.fKH) * _bouter(b.K1, a.K1),
            _col(p.fH) * b.K2 + _col(p.fHH) * _bouter(b.K1, b.K1),
        )

    def raw_g_inv_blocks(self) -> BlockMatrix:
        a, b, p = self.a, self.b, self.p
        Kinv = np.linalg.inv(a.K2)
        Hinv = np.linalg.inv(b.K2)
        return BlockMatrix(
            _col(1.0 / p.fK) * (Kinv - _col(p.fH * p.fKK / p.delta) * _bouter(a.y, a.y)),
            -_col(p.fKH / p.delta) * _bouter(a.y, b.y),
            -_col(p.fKH / p.delta) * _bouter(b.y, a.y),
            _col(1.0 / p.fH) * (Hinv - _col(p.fK * p.fHH / p.delta) * _bouter(b.y, b.y)),
        )

    def raw_cartan_blocks(self):
        """Third derivatives of f(K(y_bar), H(y_tilde)) in the four index families."""
        a, b, p = self.a, self.b, self.p

        def pure(fd, fdd, fddd, X1, X2, X3):
            sym = (X1[:, :, None, None] * X2[:, None, :, :]
                   + X1[:, None, :, None] * X2[:, :, None, :]
                   + X1[:, None, None, :] * X2[:, :, :, None])
            return _col3(fd) * X3 + _col3(fdd) * sym + _col3(fddd) * _bouter3(X1, X1, X1)

        aaa = pure(p.fK, p.fKK, p.fKKK, a.K1, a.K2, a.K3)
        bbb = pure(p.fH, p.fHH, p.fHHH, b.K1, b.K2, b.K3)
        # [i, j, l']
        aab = _col3(p.fKKH) * _bouter3(a.K1, a.K1, b.K1) + _col3(p.fKH) * a.K2[:, :, :, None] * b.K1[:, None, None, :]
        # [i, j', l']
        abb = _col3(p.fKHH) * _bouter3(a.K1, b.K1, b.K1) + _col3(p.fKH) * a.K1[:, :, None, None] * b.K2[:, None, :, :]
        return aaa, aab, abb, bbb

    def assemble_cartan(self, aaa, aab, abb, bbb) -> np.ndarray:
        m, N = self.pm.m, self.pm.dim
        S = aaa.shape[0]
        C = np.zeros((S, N, N, N))
        A, B = slice(0, m), slice(m, N)
        C[:, A, A, A] = aaa
        C[:, A, A, B] = aab
        C[:, A, B, A] = aab.transpose(0, 1, 3, 2)
        C[:, B, A, A] = aab.transpose(0, 3, 1, 2)
        C[:, A, B, B] = abb
        C[:, B, A, B] = abb.transpose(0, 2, 1, 3)
        C[:, B, B, A] = abb.transpose(0, 2, 3, 1)
        C[:, B, B, B] = bbb
        return symmetrize(C)

    # -- public routes -------------------------------------------------------
    def g_closed_blocks(self) -> BlockMatrix:
        return self.raw_g_blocks().scaled(G_NORMALIZATION)

    def g_inv_closed_blocks(self) -> BlockMatrix:
        return self.raw_g_inv_blocks().scaled(GINV_NORMALIZATION)

    def cartan_closed(self) -> np.ndarray:
        # the published block expressions carry a leading 1/2 on the raw third derivatives
        printed = [0.5 * blk for blk in self.raw_cartan_blocks()]
        return CARTAN_NORMALIZATION * self.assemble_cartan(*printed)

    def ad(self):
        F2, grad, hess, third = derivative_tensors(self.pm.f2, self.Y)
        return F2, 0.5 * hess, 0.25 * third

    def factor_fibers(self):
        """Factor-own tensors (g_bar, C_bar, I_bar, ...), computed from K and H alone."""
        def fib(fd):
            g = 0.5 * fd.K2
            g_inv = np.linalg.inv(g)
            C = 0.25 * fd.K3
            return FiberTensors(fd.K, fd.K1, fd.K2, fd.K3, g, g_inv, C, mean_cartan(g_inv, C))
        return fib(self.a), fib(self.b)

    def _unbatch(self, x):
        return x[0] if self.single else x


def symmetrize(C) -> np.ndarray:
    perms = list(itertools.permutations(range(3)))
    lead = C.ndim - 3
    acc = np.zeros_like(C)
    for p in perms:
        acc += np.transpose(C, tuple(range(lead)) + tuple(lead + q for q in p))
    return acc / len(perms)


# ---------------------------------------------------------------------------
# operation-level API (single sample or batch)

def fundamental_tensor_closed(pm: ProductMetric, y) -> BlockMatrix:
    ev = ProductEvaluator(pm, y)
    blk = ev.g_closed_blocks()
    return BlockMatrix(*(ev._unbatch(x) for x in (blk.aa, blk.ab, blk.ba, blk.bb)))


def fundamental_tensor_ad(pm: ProductMetric, y) -> np.ndarray:
    Y, single = _as_batch(pm, y)
    _, _, hess, _ = derivative_tensors(pm.f2, Y)
    g = 0.5 * hess
    return g[0] if single else g


def inverse_fundamental_closed(pm: ProductMetric, y) -> BlockMatrix:
    ev = ProductEvaluator(pm, y)
    blk = ev.g_inv_closed_blocks()
    return BlockMatrix(*(ev._unbatch(x) for x in (blk.aa, blk.ab, blk.ba, blk.bb)))


def cartan_closed(pm: ProductMetric, y) -> np.ndarray:
    ev = ProductEvaluator(pm, y)
    return ev._unbatch(ev.cartan_closed())


def cartan_ad(pm: ProductMetric, y) -> np.ndarray:
    Y, single = _as_batch(pm, y)
    _, _, _, third = derivative_tensors(pm.f2, Y)
    C = 0.25 * third
    return C[0] if single else C


def mixed_entries(C, m: int) -> np.ndarray:
    """Entries of C whose indices touch both factors."""
    N = C.shape[-1]
    idx = np.arange(N) < m
    a = idx[:, None, None] & idx[None, :, None] & idx[None, None, :]
    b = ~idx[:, None, None] & ~idx[None, :, None] & ~idx[None, None, :]
    mask = ~(a | b)
    return C[..., mask]


# ---------------------------------------------------------------------------
# the printed variants of the mixed blocks

def printed_variant_deviations(pm: ProductMetric, y) -> dict:
    """Evaluate each transcribed mixed-block expression against the exact block.

    Mixed entries with the same index multiset are one tensor entry, but the
    transcribed expressions are written out separately per index order; this
    reports how far each literal variant lies from the exact entry, relative to
    max |C|. Two variants have unreadable index placement (a factor-1 symbol
    carrying a primed index); they are read with the only type-correct index.
    """
    ev = ProductEvaluator(pm, y)
    a, b, p = ev.a, ev.b, ev.p
    _, aab, abb, _ = ev.raw_cartan_blocks()
    exact_aab, exact_abb = 0.5 * aab, 0.5 * abb
    K1, K2, H1, H2 = a.K1, a.K2, b.K1, b.K2
    fKHK = p.fKKH  # the transcription writes f_KHK
    variants_aab = {
        # C_ijl' = 1/2[f_KHK K_i K_j H_l' + f_KH K_ij H_l']
        "ijl'": 0.5 * (_col3(fKHK) * _bouter3(K1, K1, H1) + _col3(p.fKH) * K2[:, :, :, None] * H1[:, None, None, :]),
        # C_ij'l = 1/2[f_KHK K_i H_j' K_l + f_KH K_il H_j']  (stored as [i, l, j'])
        "ij'l": 0.5 * (_col3(fKHK) * _bouter3(K1, K1, H1) + _col3(p.fKH) * K2[:, :, :, None] * H1[:, None, None, :]),
        # C_i'jl = 1/2[f_KHK H_i' K_j K_l + f_KH K_jl H_i']  (stored as [j, l, i'])
        "i'jl": 0.5 * (_col3(fKHK) * _bouter3(K1, K1, H1) + _col3(p.fKH) * K2[:, :, :, None] * H1[:, None, None, :]),
    }
    variants_abb = {
        # C_ij'l' = 1/2[f_KHH K_i H_j' H_l' + f_KH K_i H_j'l']
        "ij'l'": 0.5 * (_col3(p.fKHH) * _bouter3(K1, H1, H1) + _col3(p.fKH) * K1[:, :, None, None] * H2[:, None, :, :]),
        # C_i'j'l = 1/2[f_KHK H_i' H_j' K_l + f_KH H_i'j' K_l]  (stored as [l, i', j'])
        "i'j'l (first form)": 0.5 * (_col3(fKHK) * _bouter3(K1, H1, H1) + _col3(p.fKH) * K1[:, :, None, None] * H2[:, None, :, :]),
        # C_i'jl' = 1/2[f_KHH K_j H_i' H_l' + f_KH K_l H_i'l'], K_l read as K_j  (stored as [j, i', l'])
        "i'jl'": 0.5 * (_col3(p.fKHH) * _bouter3(K1, H1, H1) + _col3(p.fKH) * K1[:, :, None, None] * H2[:, None, :, :]),
        # C_i'j'l = 1/2[f_HK H_i'j' K_l + f_KHH H_i' H_j' K_l]  (stored as [l, i', j'])
        "i'j'l (second form)": 0.5 * (_col3(p.fKH) * K1[:, :, None, None] * H2[:, None, :, :] + _col3(p.fKHH) * _bouter3(K1, H1, H1)),
    }
    full = ev.cartan_closed()
    scale = np.maximum(np.abs(full).reshape(full.shape[0], -1).max(axis=1), 1e-300)
    out = {}
    for name, v in variants_aab.items():
        dev = np.abs(v - exact_aab).reshape(v.shape[0], -1).max(axis=1) / scale
        out[name] = ev._unbatch(dev)
    for name, v in variants_abb.items():
        dev = np.abs(v - exact_abb).reshape(v.shape[0], -1).max(axis=1) / scale
        out[name] = ev._unbatch(dev)
    return {k: (float(v) if np.ndim(v) == 0 else v) for k, v in out.items()}


# ---------------------------------------------------------------------------
# bundle

@dataclass
class TensorBundle:
    m: int
    n: int
    y: np.ndarray
    route: str
    F2: float
    K: float
    H: float
    partials: FPartials
    delta: float
    K_i: np.ndarray
    K_ij: np.ndarray
    K_ijl: np.ndarray
    H_i: np.ndarray
    H_ij: np.ndarray
    H_ijl: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    C: np.ndarray
    I: np.ndarray
    normC_sq: float = field(init=False)
    normI_sq: float = field(init=False)

    def __post_init__(self):
        self.normC_sq = float(contraction_norm_sq(self.C, self.g_inv))
        self.normI_sq = float(self.I @ self.g_inv @ self.I)

    @property
    def C_bar(self) -> np.ndarray:
        """Factor-1 Cartan torsion (K_ijl / 4 in the AD convention)."""
        return 0.25 * self.K_ijl

    @property
    def C_tilde(self) -> np.ndarray:
        return 0.25 * self.H_ijl

    def summary(self) -> dict:
        return {"K": self.K, "H": self.H, "F2": self.F2, "delta": self.delta,
                "normC_sq": self.normC_sq, "normI_sq": self.normI_sq,
                "max_mixed_C": float(np.max(np.abs(mixed_entries(self.C, self.m)), initial=0.0))}


def tensor_bundles(pm: ProductMetric, samples, route: str = "ad") -> list[TensorBundle]:
    if route not in ("ad", "closed"):
        raise ValueError("route must be 'ad' or 'closed'")
    ev = ProductEvaluator(pm, samples)
    if route == "ad":
        F2, g, C = ev.ad()
        g_inv = np.linalg.inv(g)
    else:
        F2 = ev.p.f
        g = ev.g_closed_blocks().full()
        g_inv = ev.g_inv_closed_blocks().full()
        C = ev.cartan_closed()
    I = mean_cartan(g_inv, C)
    out = []
    for s in range(ev.Y.shape[0]):
        out.append(TensorBundle(
            pm.m, pm.n, ev.Y[s], route, float(F2[s]), float(ev.a.K[s]), float(ev.b.K[s]),
            ev.p.rows[s], float(ev.p.delta[s]),
            ev.a.K1[s], ev.a.K2[s], ev.a.K3[s], ev.b.K1[s], ev.b.K2[s], ev.b.K3[s],
            g[s], g_inv[s], C[s], I[s]))
    return out


def tensor_bundle(pm: ProductMetric, y, route: str = "ad") -> TensorBundle:
    return tensor_bundles(pm, y if isinstance(y, TangentSample) else pm.split(y), route)[0]


# ---------------------------------------------------------------------------
# norms

@dataclass
class Norms:
    normC_sq: float
    normI_sq: float
    F: float
    I_sup_integrand: float  # F * |I|_g
    C_sup_integrand: float  # F * max |C(u,u,u)| over g-unit u


def norms(bundle: TensorBundle) -> Norms:
    F = math.sqrt(bundle.F2)
    spec = float(cartan_spectral_norm(bundle.C, bundle.g, bundle.I))
    return Norms(bundle.normC_sq, bundle.normI_sq, F, F * math.sqrt(max(bundle.normI_sq, 0.0)), F * spec)


def randers_mean_norm_formula(n: int, b: float) -> float:
    """Closed-form sup-norm of the mean Cartan torsion of an n-dimensional Randers norm."""
    if not 0.0 <= b < 1.0:
        raise ValueError("Randers covector norm must lie in [0, 1)")
    if n < 2:
        raise ValueError("dimension must be at least 2")
    return (n + 1) / math.sqrt(2.0) * math.sqrt(1.0 - math.sqrt(1.0 - b * b))


def randers_cartan_bound(b: float) -> float:
    """Upper bound for the sup-norm of the Cartan torsion of a Randers norm."""
    if not 0.0 <= b < 1.0:
        raise ValueError("Randers covector norm must lie in [0, 1)")
    return 3.0 / math.sqrt(2.0) * math.sqrt(1.0 - math.sqrt(1.0 - b * b))


# ---------------------------------------------------------------------------
# mean torsion split

@dataclass
class MeanSplit:
    I_bar: np.ndarray
    I_tilde: np.ndarray
    U_literal: float
    V_literal: float
    U_exact: float
    V_exact: float
    U_measured: float
    V_measured: float
    I_literal: np.ndarray      # (I_bar + K_i U, I_tilde + H_i' V) with the transcribed U, V
    I_exact: np.ndarray        # same with the exact U, V
    I_oracle: np.ndarray       # g^{bc} C_abc from AD
    proportionality_residual: float

    @property
    def literal_residual(self) -> float:
        return float(np.max(np.abs(self.I_literal - self.I_oracle)))

    @property
    def exact_residual(self) -> float:
        return float(np.max(np.abs(self.I_exact - self.I_oracle)))

    def as_dict(self) -> dict:
        return {
            "U_literal": self.U_literal, "V_literal": self.V_literal,
            "U_exact": self.U_exact, "V_exact": self.V_exact,
            "U_measured": self.U_measured, "V_measured": self.V_measured,
            "literal_residual": self.literal_residual, "exact_residual": self.exact_residual,
            "proportionality_residual": self.proportionality_residual,
        }


def uv_literal(p: FPartials, K: float, H: float, n1: int, n2: int) -> tuple[float, float]:
    """The transcribed U, V coefficient formulas, verbatim (known to be inconsistent)."""
    D = p.fK * p.fH - 2.0 * p.f * p.fKH
    U = (1.0 / p.fK) * ((n1 + 2) * p.fKK + 2 * K * p.fKK
                        - (2 * K * p.fH * p.fKK / D) * (3 * p.fKK + 2 * K * p.fKKK)) \
        - (4 * H / D) * p.fKH * (2 * K * p.fKKH + p.fKH) \
        + (1.0 / p.fH) * (2 * H * p.fKHH + p.fKH + n2 * p.fKH
                          - (2 * H * p.fK * p.fHH / D) * (2 * H * p.fKHH + p.fKH))
    V = (1.0 / p.fK) * (2 * K * p.fKKH + n1 * p.fKH
                        - (2 * K * p.fH * p.fKK / D) * (2 * K * p.fKKH + p.fKH)) \
        - (4 * K / D) * p.fKH * (2 * H * p.fKHH + p.fKH) \
        + (1.0 / p.fH) * ((n2 + 2) * p.fHH + 2 * H * p.fHH
                          - (2 * H * p.fK * p.fHH / D) * (3 * p.fHH + 2 * H * p.fHHH))
    return U, V


def uv_exact(p: FPartials, K: float, H: float, n1: int, n2: int) -> tuple[float, float]:
    """U, V from I_a = d_a log sqrt(det g).

    det g factorizes as fK^n1 fH^n2 det(K_ij) det(H_i'j') phi(K, H) up to a constant,
    with phi = det(1 + [[fKK, fKH], [fKH, fHH]] diag(2K/fK, 2H/fH)).
    """
    fK, fH = p.fK, p.fH
    D = p.fKK * p.fHH - p.fKH ** 2
    DK = p.fKKK * p.fHH + p.fKK * p.fKHH - 2 * p.fKH * p.fKKH
    DH = p.fKKH * p.fHH + p.fKK * p.fHHH - 2 * p.fKH * p.fKHH
    q = fK * fH
    phi = 1 + 2 * K * p.fKK / fK + 2 * H * p.fHH / fH + 4 * K * H * D / q
    phi_K = (2 * p.fKK / fK + 2 * K * p.fKKK / fK - 2 * K * p.fKK ** 2 / fK ** 2
             + 2 * H * p.fKHH / fH - 2 * H * p.fHH * p.fKH / fH ** 2
             + 4 * H * D / q + 4 * K * H * DK / q - 4 * K * H * D * (p.fKK * fH + fK * p.fKH) / q ** 2)
    phi_H = (2 * K * p.fKKH / fK - 2 * K * p.fKK * p.fKH / fK ** 2
             + 2 * p.fHH / fH + 2 * H * p.fHHH / fH - 2 * H * p.fHH ** 2 / fH ** 2
             + 4 * K * D / q + 4 * K * H * DH / q - 4 * K * H * D * (p.fKH * fH + fK * p.fHH) / q ** 2)
    U = 0.5 * (n1 * p.fKK / fK + n2 * p.fKH / fH + phi_K / phi)
    V = 0.5 * (n1 * p.fKH / fK + n2 * p.fHH / fH + phi_H / phi)
    return U, V


def mean_cartan_split(pm: ProductMetric, y) -> MeanSplit:
    ev = ProductEvaluator(pm, y if isinstance(y, TangentSample) else pm.split(y))
    fa, fb = ev.factor_fibers()
    m = pm.m
    K, H = float(ev.a.K[0]), float(ev.b.K[0])
    K1, H1 = ev.a.K1[0], ev.b.K1[0]
    p = ev.p.rows[0]
    I_bar, I_tilde = fa.I[0], fb.I[0]
    Ul, Vl = uv_literal(p, K, H, pm.m, pm.n)
    Ue, Ve = uv_exact(p, K, H, pm.m, pm.n)
    _, g, C = ev.ad()
    I_or = mean_cartan(np.linalg.inv(g[0]), C[0])
    dA, dB = I_or[:m] - I_bar, I_or[m:] - I_tilde
    Um = float(dA @ ev.a.y[0] / (2 * K))
    Vm = float(dB @ ev.b.y[0] / (2 * H))
    prop = float(max(np.max(np.abs(dA - K1 * Um)), np.max(np.abs(dB - H1 * Vm))))
    return MeanSplit(
        I_bar, I_tilde, Ul, Vl, Ue, Ve, Um, Vm,
        np.concatenate([I_bar + K1 * Ul, I_tilde + H1 * Vl]),
        np.concatenate([I_bar + K1 * Ue, I_tilde + H1 * Ve]),
        I_or, prop)


# ---------------------------------------------------------------------------
# normalization calibration

def calibrate_normalizations() -> dict:
    """Recover the three closed-to-AD constants from reference configurations.

    g and g_inv are matched on Euclidean x Euclidean with f = K + H. C vanishes
    there, so C is matched on Euclidean x Euclidean with the L^4 product, where the
    mixed blocks are nonzero.
    """
    from .metrics import euclidean

    y = TangentSample(np.array([1.0, 0.3]), np.array([0.5, 1.0]))
    pm = ProductMetric(euclidean(2), euclidean(2), Linear(1.0, 1.0))
    ev = ProductEvaluator(pm, y)
    _, g_ad, _ = ev.ad()
    raw_g = ev.raw_g_blocks().full()
    raw_ginv = ev.raw_g_inv_blocks().full()
    g_const = float(np.sum(g_ad * raw_g) / np.sum(raw_g * raw_g))
    ginv_true = np.linalg.inv(g_ad)
    ginv_const = float(np.sum(ginv_true * raw_ginv) / np.sum(raw_ginv * raw_ginv))

    pm4 = ProductMetric(euclidean(2), euclidean(2), LpProduct(4.0))
    ev4 = ProductEvaluator(pm4, y)
    _, _, C_ad = ev4.ad()
    printed = ev4.assemble_cartan(*[0.5 * blk for blk in ev4.raw_cartan_blocks()])
    c_const = float(np.sum(C_ad * printed) / np.sum(printed * printed))
    return {"g": g_const, "g_inv": ginv_const, "C": c_const}
