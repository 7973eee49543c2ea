import numpy as np
import pytest

from rovf.samplers import Deterministic, FusionFrameProjection, KaczmarzRow

ACCEPTANCE_RESULTS = []


@pytest.fixture
def two_axis():
    return FusionFrameProjection(([[1.0, 0.0]], [[0.0, 1.0]]), [0.5, 0.5])


@pytest.fixture
def half_identity():
    return Deterministic(0.5 * np.eye(4))


@pytest.fixture
def kaczmarz_diag():
    return KaczmarzRow(np.array([[1.0, 0.0], [0.0, 2.0]]))


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:2d}. {title}: {detail}")
