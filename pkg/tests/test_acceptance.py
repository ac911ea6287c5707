"""Acceptance suite: one test per validation check, run at full strength.

Each test delegates to the corresponding check in ``myfdiv.selftest`` so the
checks, their tolerances and their time budgets live in one place and are
exercised identically from pytest and from the command line.
"""

import pytest

from myfdiv.selftest import CHECKS

CHECK_NAMES = list(CHECKS)


@pytest.mark.parametrize("name", CHECK_NAMES)
def test_acceptance(name):
    result = CHECKS[name]()
    assert result.ok, f"{name}: {result.details}"
