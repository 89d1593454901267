"""Shared fixtures: the bundled example corpus and small helpers."""
from __future__ import annotations

from pathlib import Path

import pytest

from resusage.cli import RunConfig, analyze

EXAMPLES = Path(__file__).resolve().parents[1] / "src" / "resusage" / "examples"


def example_text(name: str) -> str:
    return (EXAMPLES / f"{name}.pi").read_text()


def run_example(name: str, **kw):
    """Analyze an example file and return the report."""
    return analyze(example_text(name), RunConfig(**kw), f"{name}.pi")


@pytest.fixture
def examples_dir() -> Path:
    return EXAMPLES


# ---------------------------------------------------------------------------
# acceptance gate reporting

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    """Remember (and print) one acceptance line, then fail the test if needed."""
    ACCEPTANCE[criterion] = (ok, detail)
    print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
