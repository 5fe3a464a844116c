import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import toy_graph as _toy_graph  # noqa: E402


@pytest.fixture
def toy():
    return _toy_graph()


def data_dir() -> Path:
    return Path(os.environ.get("GRAFIELD_DATA_DIR", "data"))


ACCEPTANCE_RESULTS: list = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num, title, status, elapsed in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[{status}] criterion {num:02d}: {title} ({elapsed:.3f}s)")
