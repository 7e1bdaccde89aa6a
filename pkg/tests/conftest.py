import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from graphite import build_graph  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"

# v1..v5 -> 0..4; f1..f3 -> 0..2; class A -> 0, B -> 1
G_FIG_EDGES = [(0, 2), (1, 3), (1, 4), (0, 3)]
G_FIG_FEATURES = [(0, 0), (1, 0), (1, 2), (2, 1), (3, 1), (4, 1), (4, 2)]
G_FIG_LABELS = {0: 0, 1: 0, 2: 1, 3: 1, 4: 1}


@pytest.fixture
def g_fig():
    return build_graph(5, G_FIG_EDGES, G_FIG_FEATURES, G_FIG_LABELS)


@pytest.fixture
def g_fig_dir():
    return FIXTURES / "g_fig"


ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(number, ok, detail)``."""

    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE, key=lambda item: str(item[0])):
            terminalreporter.write_line(line)
