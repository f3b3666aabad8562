import numpy as np
import pytest

from asymdir import manifold, operator


@pytest.fixture
def hyp():
    return manifold.hyperbolic(1.0)


@pytest.fixture(params=["p1.5", "p2", "p3", "minimal"])
def profile(request):
    if request.param == "minimal":
        return operator.minimal()
    return operator.p_laplacian(float(request.param[1:]))


@pytest.fixture
def s_grid():
    return np.linspace(0.0, 10.0, 1001)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
