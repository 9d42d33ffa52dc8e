import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sigkit.structure import from_min_path_sets  # noqa: E402


@pytest.fixture
def phi1():
    # series of components 1 and 2; components 3 and 4 irrelevant
    return from_min_path_sets(4, [[1, 2]])


@pytest.fixture
def phi2():
    return from_min_path_sets(4, [[2, 4], [3, 4]])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
