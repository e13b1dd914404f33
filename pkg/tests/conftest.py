import shutil
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def configs(tmp_path):
    """A private copy of the example configs so outputs land in tmp_path."""
    dst = tmp_path / "configs"
    shutil.copytree(CONFIGS, dst)
    return dst


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(acceptance_log.LINES):
            terminalreporter.write_line(line)
