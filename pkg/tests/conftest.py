import pytest

from lyapflow import _backend


def _available_backends():
    names = ["python"]
    try:
        _backend.get("compiled")
        names.insert(0, "compiled")
    except ImportError:
        pass
    return names


@pytest.fixture(params=_available_backends())
def kernels(request):
    """Each available kernel module (compiled extension and numpy fallback)."""
    return _backend.get(request.param)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
