import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from crosscast import synthetic  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def regime_series():
    return synthetic.candles_from_closes(synthetic.regime_closes(900, seed=3))


@pytest.fixture(scope="session")
def sine_series():
    return synthetic.candles_from_closes(synthetic.sine_closes(500))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
