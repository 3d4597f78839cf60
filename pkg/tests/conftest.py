"""Test-suite configuration.

Hypothesis runs derandomized.  Acceptance tests record one verdict line per
criterion; the lines are printed in the terminal summary (and immediately,
for ``pytest -s``)."""

from __future__ import annotations

import pytest
from hypothesis import settings

# fixed example sequences: a failure reproduces on every run and machine
settings.register_profile("deterministic", derandomize=True, database=None)
settings.load_profile("deterministic")

_VERDICTS: dict[int, str] = {}


@pytest.fixture
def record_criterion():
    def record(number: int, title: str, checks: list[tuple[str, bool, str]]) -> bool:
        passed = all(ok for _, ok, _ in checks)
        detail = "; ".join(_describe(*check) for check in checks)
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}" + (f" -- {detail}" if detail else "")
        _VERDICTS[number] = line
        print(line)
        return passed

    return record


def _describe(name: str, ok: bool, info: str) -> str:
    tag = name if ok else f"{name} [FAIL]"
    return f"{tag}: {info}" if info else tag


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_VERDICTS):
            terminalreporter.write_line(_VERDICTS[number])
