import numpy as np
import pytest

from zetagof.distributions import RngStream, ZetaModel, sample_zeta


@pytest.fixture
def null_sample():
    """A fixed n=100 draw from Zeta(2)."""
    return sample_zeta(ZetaModel(2.0), 100, RngStream(12345, 0))


def pytest_configure(config):
    np.seterr(over="raise", invalid="raise")


_ACCEPTANCE = {}


class _Criterion:
    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.details = []

    def note(self, text):
        self.details.append(text)


@pytest.fixture
def criterion(request):
    """Record the outcome of one acceptance criterion for the summary."""
    import time

    marker = request.node.get_closest_marker("criterion")
    crit = _Criterion(*marker.args)
    t0 = time.perf_counter()
    _ACCEPTANCE[crit.number] = (crit, None, None)
    yield crit
    _ACCEPTANCE[crit.number] = (crit, time.perf_counter() - t0, request.node)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item._acceptance_passed = rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        crit, elapsed, node = _ACCEPTANCE[number]
        passed = bool(getattr(node, "_acceptance_passed", False))
        status = "PASS" if passed else "FAIL"
        took = f"{elapsed:.1f}s" if elapsed is not None else "n/a"
        detail = "; ".join(crit.details)
        tr.write_line(f"[{status}] {number:>2}. {crit.title} ({took}) {detail}")
