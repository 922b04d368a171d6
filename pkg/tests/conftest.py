import pytest

from gp_spectrum import KernelParams

_ACCEPTANCE_LINES = []

QUARTET = [(0.5, 1.0), (0.2, 1.0), (0.75, 1.0), (1.0, 1.0)]


@pytest.fixture(params=QUARTET, ids=lambda p: f"a{p[0]}-b{p[1]}")
def quartet_params(request):
    return KernelParams(*request.param)


@pytest.fixture
def acceptance_log():
    """Collects one PASS/FAIL line per criterion; printed in the terminal summary."""

    def record(criterion, passed, detail):
        line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
