"""Torsion of Minkowskian product Finsler metrics, computed by exact jets and checked numerically."""

from .jets import Jet3, derivative_tensors, fd_third
from .metrics import (
    CustomMetric,
    MetricDomainError,
    MetricError,
    RandersMetric,
    RiemannianMetric,
    TangentSample,
    euclidean,
)
from .product import CustomProduct, InadmissiblePoint, Linear, LpProduct, ProductMetric, delta, partials
from .tensors import (
    cartan_ad,
    cartan_closed,
    fundamental_tensor_ad,
    fundamental_tensor_closed,
    inverse_fundamental_closed,
    norms,
    tensor_bundle,
    tensor_bundles,
)
from .verify import CheckSpec, SamplePlan, VerificationReport, run_suite

__version__ = "0.1.0"

__all__ = [
    "Jet3", "derivative_tensors", "fd_third",
    "CustomMetric", "MetricDomainError", "MetricError", "RandersMetric", "RiemannianMetric",
    "TangentSample", "euclidean",
    "CustomProduct", "InadmissiblePoint", "Linear", "LpProduct", "ProductMetric", "delta", "partials",
    "cartan_ad", "cartan_closed", "fundamental_tensor_ad", "fundamental_tensor_closed",
    "inverse_fundamental_closed", "norms", "tensor_bundle", "tensor_bundles",
    "CheckSpec", "SamplePlan", "VerificationReport", "run_suite",
    "__version__",
]
