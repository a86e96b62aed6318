import numpy as np
import pytest

from qis.funcquant import build_brownian_quantizer
from qis.pipeline import Cache


@pytest.fixture(scope="session")
def cache(request):
    """Grid/quantizer cache kept between test runs (grids cost tens of seconds each)."""
    return Cache(request.config.cache.mkdir("qis-grids"))


@pytest.fixture(scope="session")
def kl966():
    return build_brownian_quantizer(1.0, (23, 7, 3, 2))


@pytest.fixture
def rng_np():
    return np.random.default_rng(20240607)


# One summary line per acceptance criterion -------------------------------

_CRITERIA: dict = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rpartition("::")[2]
    if "test_acceptance.py" not in report.nodeid or not name.startswith("test_criterion_"):
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        reason = ""
        if report.failed:
            reason = str(getattr(report.longrepr, "reprcrash", None) and report.longrepr.reprcrash.message or report.longrepr)
            reason = reason.splitlines()[0]
        _CRITERIA[name] = (report.outcome, reason)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda n: int(n.split("_")[2])):
        outcome, reason = _CRITERIA[name]
        label = "PASS" if outcome == "passed" else "FAIL"
        number = name.split("_")[2]
        title = " ".join(name.split("_")[3:])
        line = f"{label} criterion {number}: {title}"
        if reason:
            line += f" -- {reason}"
        terminalreporter.write_line(line)
