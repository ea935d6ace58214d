import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from finsler_product.metrics import RandersMetric, RiemannianMetric, euclidean

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def factor_family(name: str, dim: int):
    """Built-in factor metrics used across the suite."""
    if name == "euclidean":
        return euclidean(dim)
    if name == "diag23":
        return RiemannianMetric(dim, np.diag([2.0, 3.0, 5.0][:dim]))
    if name.startswith("randers"):
        b = float(name.removeprefix("randers"))
        direction = np.arange(1.0, dim + 1.0)
        return RandersMetric.with_norm(b, dim, direction=direction)
    raise KeyError(name)


FACTOR_NAMES = ["euclidean", "diag23", "randers0.3", "randers0.6"]


def pytest_terminal_summary(terminalreporter):
    import sys

    module = next((m for name, m in list(sys.modules.items()) if name.endswith("test_acceptance")), None)
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
