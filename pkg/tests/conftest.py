import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion label")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    name = mark.args[0]
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        ok = rep.outcome == "passed"
        _criteria[name] = _criteria.get(name, True) and ok


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in _criteria.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")


@pytest.fixture(scope="session")
def case5_bootstrap():
    """Twenty annealed fits of case 5 at T=5, n=100, master seed 2024."""
    from fracsde.experiments import CASES, run_classical_case
    from fracsde.hurst import TimeGrid
    from fracsde.mle import AnnealConfig

    row, boot = run_classical_case(CASES[5], 2024, TimeGrid(5.0, 100), AnnealConfig(), 20)
    return row, boot
