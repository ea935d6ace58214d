import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from finsler_product.expr import ExpressionError
from finsler_product.jets import derivative_tensors
from finsler_product.metrics import (
    CustomMetric,
    MetricDomainError,
    MetricError,
    RandersMetric,
    RiemannianMetric,
    TangentSample,
    euclidean,
    homogeneity_residual,
    k_value,
    metric_from_dict,
    strong_convexity_check,
    unit_directions,
)

vec2 = st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=2).filter(
    lambda v: np.hypot(*v) > 1e-3)


def test_k_value_examples():
    assert k_value(RiemannianMetric(2), [3.0, 4.0]) == 25.0
    assert k_value(RandersMetric(2, None, [0.5, 0.0]), [1.0, 0.0]) == pytest.approx(2.25, rel=1e-15)
    assert k_value(RandersMetric(2, None, [0.6, 0.0]), [0.0, 1.0]) == pytest.approx(1.0, rel=1e-15)


def test_k_value_rejects_zero_vector():
    with pytest.raises(MetricDomainError):
        k_value(euclidean(2), [0.0, 0.0])


def test_convexity_examples(rng):
    rep = strong_convexity_check(RiemannianMetric(2, np.diag([2.0, 3.0])), [[0.3, 1.0]])
    assert rep.passed and rep.min_eigenvalue == pytest.approx(2.0)
    _, _, h, _ = derivative_tensors(RiemannianMetric(2, np.diag([2.0, 3.0])).f2, [0.3, 1.0])
    np.testing.assert_allclose(np.linalg.eigvalsh(0.5 * h), [2.0, 3.0])
    rep = strong_convexity_check(RandersMetric(2, None, [0.9, 0.0]), unit_directions(2, 64, rng))
    assert rep.passed and rep.min_eigenvalue > 0


def test_randers_norm_must_be_below_one():
    with pytest.raises(MetricError):
        RandersMetric(2, None, [1.2, 0.0])
    with pytest.raises(MetricError):
        RandersMetric(2, np.diag([4.0, 1.0]), [2.0, 0.0])  # a-norm of b is exactly 1


def test_with_norm_sets_covector_norm():
    a = np.array([[2.0, 0.4], [0.4, 1.0]])
    rm = RandersMetric.with_norm(0.7, 2, a, direction=[1.0, 2.0])
    assert rm.b_norm == pytest.approx(0.7, rel=1e-14)


def test_spd_validation():
    with pytest.raises(MetricError):
        RiemannianMetric(2, [[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(MetricError):
        RiemannianMetric(2, [[1.0, 0.1], [0.0, 1.0]])
    with pytest.raises(MetricError):
        RiemannianMetric(2, np.eye(3))


@given(vec2, st.sampled_from([0.5, 2.0, 7.0]))
def test_homogeneity(y, lam):
    for metric in (RandersMetric(2, [[2.0, 0.3], [0.3, 1.0]], [0.4, -0.2]), RiemannianMetric(2, np.diag([2, 3]))):
        y = np.array(y)
        assert k_value(metric, lam * y) == pytest.approx(lam ** 2 * k_value(metric, y), rel=1e-12)


@given(vec2)
def test_euler_identities(y):
    rm = RandersMetric(2, [[2.0, 0.3], [0.3, 1.0]], [0.4, -0.2])
    K, K1, K2, _ = derivative_tensors(rm.f2, y)
    y = np.array(y)
    assert abs(K1 @ y - 2 * K) <= 1e-10 * 2 * K
    assert np.max(np.abs(K2 @ y - K1)) <= 1e-10 * np.max(np.abs(K1))


def test_riemannian_third_derivative_vanishes(rng):
    metric = RiemannianMetric(3, np.array([[3.0, 0.5, 0.1], [0.5, 2.0, 0.0], [0.1, 0.0, 1.0]]))
    _, _, _, c = derivative_tensors(metric.f2, rng.normal(size=(20, 3)))
    assert np.max(np.abs(c)) <= 1e-12


def test_tangent_sample_names_zero_factor():
    with pytest.raises(MetricDomainError, match="first factor"):
        TangentSample([0.0, 0.0], [1.0, 0.0])
    with pytest.raises(MetricDomainError, match="second factor"):
        TangentSample([1.0, 0.0], [0.0, 0.0])
    s = TangentSample([1.0, 2.0], [3.0])
    np.testing.assert_array_equal(s.y, [1.0, 2.0, 3.0])
    np.testing.assert_array_equal(s.scaled(2.0).y, [2.0, 4.0, 6.0])


def test_custom_metric_matches_builtin(rng):
    custom = CustomMetric(2, "2*y1**2 + 3*y2**2")
    builtin = RiemannianMetric(2, np.diag([2.0, 3.0]))
    for y in rng.normal(size=(5, 2)):
        assert k_value(custom, y) == pytest.approx(k_value(builtin, y), rel=1e-15)
    randers = CustomMetric(2, "(sqrt(y1**2 + y2**2) + 0.5*y1)**2")
    for y in rng.normal(size=(5, 2)):
        assert k_value(randers, y) == pytest.approx(k_value(RandersMetric(2, None, [0.5, 0]), y), rel=1e-14)


def test_custom_metric_homogeneity_residual():
    assert homogeneity_residual(CustomMetric(2, "y1**2 + y2**2"), [0.3, 0.4]) <= 1e-15
    assert homogeneity_residual(CustomMetric(2, "y1**2 + y2**2 + y1"), [0.3, 0.4]) > 0.1


@pytest.mark.parametrize("src", ["y3", "exp(y1)", "y1 ** y2", "__import__('os')", "y1 if y2 else y1", "[y1]"])
def test_custom_expression_rejected(src):
    with pytest.raises(ExpressionError):
        CustomMetric(2, src)


def test_metric_from_dict():
    assert isinstance(metric_from_dict({"family": "euclidean", "dim": 3}), RiemannianMetric)
    r = metric_from_dict({"family": "randers", "dim": 2, "b": [0.1, 0.2]})
    assert r.b_norm == pytest.approx(np.hypot(0.1, 0.2))
    with pytest.raises(MetricError):
        metric_from_dict({"family": "kropina", "dim": 2})
