import pytest

from cknlab.params import Params

# one representative per region, plus the degenerate line
REGION_POINTS = {
    "A1": Params(3, 0.0, 0.0),
    "A2": Params(3, 3.0, 1.0),
    "B1": Params(3, 2.0, 0.0),
    "B2": Params(3, 0.0, 1.0),
    "C": Params(3, 1.0, 0.0),
}


@pytest.fixture(params=sorted(REGION_POINTS))
def region_point(request):
    return request.param, REGION_POINTS[request.param]


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
