from pathlib import Path

import pytest
from hypothesis import settings

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


# acceptance criteria: tests marked ``acceptance(n)`` get one summary line each
_ACCEPTANCE: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    n = marker.args[0]
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    if report.skipped:
        _ACCEPTANCE[n] = ("SKIP", str(report.longrepr[2]) if isinstance(report.longrepr, tuple) else "")
    elif report.failed:
        _ACCEPTANCE[n] = ("FAIL", detail or report.when)
    elif report.when == "call":
        _ACCEPTANCE[n] = ("PASS", detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        status, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"ACCEPTANCE {n}: {status}" + (f" ({detail})" if detail else ""))
