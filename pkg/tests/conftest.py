import shutil
from pathlib import Path

import pytest

from botmut.rasa import parse_project

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
RPS = FIXTURES / "rps-mini"
TWO_STORY = FIXTURES / "two-story"
SUITES = FIXTURES / "suites"


@pytest.fixture
def rps():
    return parse_project(RPS)


@pytest.fixture
def two_story():
    return parse_project(TWO_STORY)


@pytest.fixture
def rps_copy(tmp_path):
    dst = tmp_path / "rps-mini"
    shutil.copytree(RPS, dst)
    return dst


def write_suite(directory: Path, scripts: dict) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    for name, text in scripts.items():
        (directory / f"{name}.convo.txt").write_text(text, encoding="utf-8")
    return directory


# -- acceptance summary ------------------------------------------------------------

_ACCEPTANCE: dict = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::" not in report.nodeid:
        return
    name = report.nodeid.rsplit("::", 1)[1]
    if report.when == "call" or report.failed:
        prev = _ACCEPTANCE.get(name)
        if prev is None or prev[0] == "PASS":
            _ACCEPTANCE[name] = ("PASS" if report.passed else "FAIL", report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (status, seconds) in sorted(_ACCEPTANCE.items()):
        terminalreporter.write_line(f"{status}  {name}  ({seconds:.2f}s)")
