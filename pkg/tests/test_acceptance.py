"""Acceptance gate: every built-in criterion must pass at full strength.

Each test runs one criterion with the full parameter set and prints its
pass/fail line so the suite output doubles as the acceptance report.
"""

import pytest

from lsq.selftest import CRITERIA, FULL


def _run(index: int) -> None:
    result = CRITERIA[index - 1](FULL)
    status = "PASS" if result.passed else "FAIL"
    print(f"[{status}] criterion {result.index}: {result.name} -- {result.detail}")
    assert result.index == index
    assert result.passed, f"criterion {index} ({result.name}): {result.detail}"


@pytest.mark.parametrize("index", range(1, 11))
def test_criterion(index, capsys):
    with capsys.disabled():
        _run(index)
