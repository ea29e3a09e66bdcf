import numpy as np
import pytest

from fcompare.montecarlo import JointPmf

_CRITERIA = []


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_CRITERIA):
        terminalreporter.write_line(line)


@pytest.fixture
def criterion():
    """Record a one-line PASS/FAIL for the acceptance summary, then assert."""
    def record(number, ok, detail):
        _CRITERIA.append(f"criterion {str(number):<2}: {'PASS' if ok else 'FAIL'}  {detail}")
        print(_CRITERIA[-1])
        assert ok, detail
    return record


# moderately imbalanced, positively correlated, all cells positive
P_STAR = JointPmf.from_rates(0.15, (0.7, 0.6), (0.05, 0.06), 0.5, 0.3)


@pytest.fixture
def p_star():
    return P_STAR
