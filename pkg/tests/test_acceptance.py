"""Acceptance gate: one line per criterion, each at its stated tolerance."""
import pytest

from stokes_evans.acceptance import CHECKS


@pytest.mark.parametrize("check", CHECKS, ids=[f"criterion_{i + 1}" for i in range(len(CHECKS))])
def test_criterion(check, capsys):
    result = check()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()
