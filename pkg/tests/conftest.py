"""Shared fixtures and the acceptance-criteria summary."""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
CONFIG_DIR = ROOT / "src" / "jelk" / "configs"

# (criterion number, "PASS"/"FAIL", detail) collected by tests/test_acceptance.py
ACCEPTANCE: list[tuple[int, str, str]] = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    """Print and remember one acceptance line, then assert on it."""
    status = "PASS" if ok else "FAIL"
    line = f"criterion {number:>2}: {status}  {detail}"
    print(line)
    ACCEPTANCE.append((number, status, detail))
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def banknote_path() -> Path:
    env = os.environ.get("JELK_BANKNOTE")
    return Path(env) if env else ROOT / "data" / "data_banknote_authentication.txt"
