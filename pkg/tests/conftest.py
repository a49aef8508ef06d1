import numpy as np
import pytest

_ACCEPTANCE = {}
_NOTES: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, text): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    k, text = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        ok = report.outcome == "passed"
        prev = _ACCEPTANCE.get(k, (True, text))
        _ACCEPTANCE[k] = (prev[0] and ok, text)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        ok, text = _ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {text}")
        for line in _NOTES.get(k, []):
            terminalreporter.write_line(f"      {line}")


@pytest.fixture
def note(request):
    """Attach a measured value to the criterion summary line."""
    marker = request.node.get_closest_marker("criterion")
    k = marker.args[0] if marker else None

    def add(text):
        print(text)
        _NOTES.setdefault(k, []).append(text)

    return add


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
