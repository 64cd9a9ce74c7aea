"""Acceptance suite: runs every verification criterion at its stated
tolerance and prints one pass/fail line per criterion."""
import pytest

from hcmeta.verify import CRITERIA, run_criterion


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    res = run_criterion(number)
    with capsys.disabled():
        print(res.line())
    assert res.passed, f"criterion {number} failed: {res.details}"
