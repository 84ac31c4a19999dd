import numpy as np
import pytest

from torsionlab.graded_complex import GradedChainComplex


@pytest.fixture
def two_term():
    """``C^0 -2-> C^1`` with the swap involution."""
    one = np.eye(1, dtype=complex)
    return GradedChainComplex((1, 1), (2 * one,), (one, one))


def make_two_term(a):
    one = np.eye(1, dtype=complex)
    return GradedChainComplex((1, 1), (a * one,), (one, one))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
