import numpy as np
import pytest

from entropic_tradeoff import pauli_observable, sharp_to_povm


@pytest.fixture
def Z():
    return pauli_observable("Z")


@pytest.fixture
def X():
    return pauli_observable("X")


@pytest.fixture
def Y():
    return pauli_observable("Y")


@pytest.fixture
def zproj(Z):
    return sharp_to_povm(Z)


@pytest.fixture
def xproj(X):
    return sharp_to_povm(X)


KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)


_CRITERIA = []


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion; the line is printed in the terminal summary."""
    entry = {"name": request.node.name, "detail": ""}

    def report(detail):
        entry["detail"] = detail

    yield report
    rep = getattr(request.node, "rep_call", None)
    entry["passed"] = bool(rep and rep.passed)
    _CRITERIA.append(entry)


@pytest.hookimpl(hookwrapper=True, tryfirst=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for e in _CRITERIA:
        status = "PASS" if e["passed"] else "FAIL"
        terminalreporter.write_line(f"{status}  {e['name']}  {e['detail']}")
