"""Shared fixtures: corpus locations, a deterministic RNG, sample project.

Also collects the release-gate result lines so the run summary ends with
one pass/fail line per gated property, even though pytest captures each
test's stdout.
"""
import random
import shutil
import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
GOLDEN_DIR = TESTS_DIR / "data" / "golden"
SAMPLE_PROJECT_DIR = TESTS_DIR.parent / "sample_projects" / "pouch"

sys.path.insert(0, str(TESTS_DIR))

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_runtest_logreport(report):
    if report.failed and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        record_acceptance(f"ACCEPTANCE FAIL: {name} ({report.when})")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0x5EA1)


@pytest.fixture
def golden_files() -> list[Path]:
    files = sorted(GOLDEN_DIR.glob("*.gcode"))
    assert len(files) >= 5, "golden corpus must hold at least five slicer files"
    return files


@pytest.fixture
def sample_project(tmp_path) -> Path:
    """A scratch copy of the committed sample project (safe to write into)."""
    dest = tmp_path / "pouch"
    shutil.copytree(SAMPLE_PROJECT_DIR, dest)
    return dest
