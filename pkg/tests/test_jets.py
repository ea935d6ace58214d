import itertools

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from finsler_product.jets import (
    Jet3,
    JetDomainError,
    derivative_tensors,
    fd_third,
    jet_eval,
    sqrt,
    symmetric_triples,
)
from finsler_product.metrics import RandersMetric

coeffs = st.lists(st.floats(-3, 3, allow_nan=False), min_size=8, max_size=8)

T1, T2, T3 = sp.symbols("t1 t2 t3")
MONOMIALS = [sp.Integer(1), T1, T2, T3, T1 * T2, T1 * T3, T2 * T3, T1 * T2 * T3]


def as_poly(c):
    return sum(sp.Float(v) * m for v, m in zip(c, MONOMIALS))


def truncate(expr):
    """Coefficients of expr modulo t_i**2 = 0, in jet order."""
    p = sp.Poly(sp.expand(expr), T1, T2, T3)
    out = []
    for m in MONOMIALS:
        exps = sp.Poly(m, T1, T2, T3).monoms()[0]
        out.append(float(p.coeff_monomial(exps)))
    return out


def norm2(ys):
    return ys[0] * ys[0] + ys[1] * ys[1]


def test_quadratic_example():
    j = jet_eval(norm2, [1.0, 0.0], [[1, 0], [1, 0], [1, 0]])
    np.testing.assert_array_equal(j.coefficients(), [1, 2, 2, 2, 2, 2, 2, 0])


def test_cubic_third_derivative():
    j = jet_eval(lambda ys: ys[0] ** 3, [2.0], [[1.0], [1.0], [1.0]])
    assert float(j.c123) == 6.0


def test_identity_seeding_returns_direction():
    u = np.array([0.3, -1.7, 2.0])
    for slot in range(3):
        dirs = [u if s == slot else np.zeros(3) for s in range(3)]
        j = jet_eval(lambda ys: ys[1], [1.0, 2.0, 3.0], dirs)
        c = np.array(j.coefficients(), dtype=float)
        assert c[1 + slot] == u[1]
        assert np.count_nonzero(c[1:]) == 1


@given(coeffs, coeffs)
def test_product_is_truncated_polynomial_product(a, b):
    got = np.array((Jet3(*a) * Jet3(*b)).coefficients(), dtype=float)
    want = truncate(as_poly(a) * as_poly(b))
    np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)


@given(coeffs, coeffs, st.floats(-2, 2), st.floats(-2, 2))
def test_linearity(a, b, x, y):
    lhs = x * Jet3(*a) + y * Jet3(*b)
    rhs = np.array(a) * x + np.array(b) * y
    np.testing.assert_allclose(lhs.c, rhs, rtol=1e-12, atol=1e-12)


@given(coeffs)
def test_reciprocal_times_self_is_one(a):
    a = list(a)
    a[0] = 1.0 + abs(a[0])
    j = Jet3(*a)
    np.testing.assert_allclose((j * j.reciprocal()).c, [1, 0, 0, 0, 0, 0, 0, 0], atol=1e-10)


@given(coeffs, st.sampled_from([0.5, 1.5, -0.5, 2.5, -2.0, 3.0]))
def test_real_power_matches_series(a, r):
    a = list(a)
    a[0] = 0.5 + abs(a[0])
    got = np.array((Jet3(*a) ** r).coefficients(), dtype=float)
    # expand (c0 + rest)^r to third order around c0 with sympy
    c0 = sp.Float(a[0])
    rest = as_poly(a) - c0
    series = sum(sp.binomial(r, k) * c0 ** (r - k) * rest ** k for k in range(4))
    np.testing.assert_allclose(got, truncate(series), rtol=1e-10, atol=1e-10)


def test_sqrt_squared_roundtrip():
    j = Jet3(2.0, 0.3, -0.2, 0.5, 0.1, 0.0, 0.7, -0.4)
    np.testing.assert_allclose((sqrt(j) * sqrt(j)).c, j.c, atol=1e-14)


def test_domain_errors():
    with pytest.raises(JetDomainError):
        Jet3(-1.0, 1.0).sqrt()
    with pytest.raises(JetDomainError):
        Jet3(0.0, 1.0) ** 0.5
    with pytest.raises(JetDomainError):
        1.0 / Jet3(0.0, 1.0)
    with pytest.raises(JetDomainError):
        Jet3(1.0) / 0.0


@given(st.permutations([0, 1, 2]), st.lists(st.floats(0.2, 2.0), min_size=3, max_size=3))
def test_seed_slots_commute(perm, y):
    rm = RandersMetric(3, None, [0.2, -0.3, 0.1])
    dirs = [np.eye(3)[0], np.eye(3)[1] + np.eye(3)[2], np.array([0.5, -1.0, 2.0])]
    base = jet_eval(rm.f2, y, dirs)
    perm_j = jet_eval(rm.f2, y, [dirs[p] for p in perm])
    assert abs(float(perm_j.c123) - float(base.c123)) <= 1e-12 * max(1.0, abs(float(base.c123)))


def test_derivative_tensors_against_sympy():
    x, y = sp.symbols("x y")
    expr = sp.sqrt(x ** 2 + 2 * y ** 2) * (x + 3 * y) / (1 + x * x)
    field = lambda v: sqrt(v[0] * v[0] + 2 * v[1] * v[1]) * (v[0] + 3 * v[1]) / (1 + v[0] * v[0])
    pt = {x: 0.7, y: -1.3}
    val, g, h, c = derivative_tensors(field, [0.7, -1.3])
    vs = (x, y)
    assert val == pytest.approx(float(expr.subs(pt)), rel=1e-14)
    for i, j, k in itertools.product(range(2), repeat=3):
        want = float(sp.diff(expr, vs[i], vs[j], vs[k]).subs(pt))
        assert c[i, j, k] == pytest.approx(want, rel=1e-12, abs=1e-12)
    for i, j in itertools.product(range(2), repeat=2):
        assert h[i, j] == pytest.approx(float(sp.diff(expr, vs[i], vs[j]).subs(pt)), rel=1e-12)


def test_batched_tensors_match_single():
    rm = RandersMetric(2, [[2.0, 0.5], [0.5, 1.0]], [0.3, 0.2])
    Y = np.array([[1.0, 0.5], [-0.2, 3.0], [0.4, -0.9]])
    batch = derivative_tensors(rm.f2, Y)
    for s in range(3):
        single = derivative_tensors(rm.f2, Y[s])
        for b_arr, s_arr in zip(batch, single):
            np.testing.assert_allclose(b_arr[s], s_arr, rtol=1e-15)


def test_symmetric_triples_count():
    assert len(symmetric_triples(4)) == 20


def test_fd_examples():
    assert fd_third(lambda v: v[0] ** 3, [1.0], 0, 0, 0, step=1e-3) == pytest.approx(6.0, abs=1e-6)
    for i, j, k in itertools.product(range(2), repeat=3):
        assert abs(fd_third(norm2, [1.0, 2.0], i, j, k, step=1e-3)) <= 1e-6


def test_fd_vs_jets_randers():
    rm = RandersMetric(2, None, [0.5, 0.0])
    jet = float(jet_eval(rm.f2, [1.0, 1.0], [[1, 0], [1, 0], [0, 1]]).c123)
    fd = fd_third(rm.f2, [1.0, 1.0], 0, 0, 1)
    assert abs(jet - fd) <= 1e-5 * abs(jet)


def test_fd_rejects_bad_input():
    with pytest.raises(ValueError):
        fd_third(norm2, [1.0, 1.0], 0, 0, 0, step=0.0)
    with pytest.raises(JetDomainError):
        with np.errstate(invalid="ignore"):
            fd_third(lambda v: np.sqrt(v[0]), [1e-4], 0, 0, 0, step=1e-3)


def _random_field(rng):
    a = rng.normal(size=3)
    A = rng.normal(size=(3, 3))
    A = A @ A.T + np.eye(3)
    b = rng.normal(size=3)
    d = rng.normal(size=3)
    e = rng.uniform(-2.0, 2.0)

    def field(v):
        q = sum(A[i, j] * v[i] * v[j] for i in range(3) for j in range(3))
        lin = sum(a[i] * v[i] for i in range(3))
        den = 1.0 + sum(b[i] * v[i] for i in range(3)) ** 2
        cube = sum(d[i] * v[i] for i in range(3)) ** 3
        return sqrt(q) * (1.0 + lin * lin) / den + e * cube + q ** 1.5 / (2.0 + q)

    return field


@pytest.mark.parametrize("seed", range(100))
def test_fd_oracle_agreement_random_fields(seed):
    rng = np.random.default_rng(seed)
    field = _random_field(rng)
    y = rng.uniform(-1.0, 1.0, 3)
    i, j, k = rng.integers(0, 3, 3)
    _, _, _, c = derivative_tensors(field, y)
    jet = c[i, j, k]
    fd = fd_third(field, y, i, j, k)
    assert abs(jet - fd) <= max(1e-5 * abs(jet), 1e-7)
