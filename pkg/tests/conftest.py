import json
import sys
from pathlib import Path

import pytest

ORACLE_DIR = Path(__file__).parent / "oracle"
sys.path.insert(0, str(ORACLE_DIR))

_acceptance_lines: list[str] = []


def report_criterion(label: str, passed: bool, detail: str) -> str:
    line = f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}"
    _acceptance_lines.append(line)
    print(line)
    return line


@pytest.fixture(scope="session")
def frozen():
    return json.loads((ORACLE_DIR / "frozen.json").read_text())


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
