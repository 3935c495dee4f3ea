"""Acceptance gate: every criterion at its stated tolerance, one verdict line each.

Run with `pytest -s tests/test_acceptance.py` to see the verdict lines, or
`xhbac accept all` for the same checks outside pytest.
"""

import pytest

from xhbac.acceptance import CRITERIA


@pytest.mark.parametrize("ident", sorted(CRITERIA))
def test_acceptance_criterion(ident):
    result = CRITERIA[ident](seed=0)
    print(result.line())
    assert result.elapsed <= result.limit, (
        f"criterion {ident} overran its runtime budget: {result.line()}"
    )
    assert result.passed, result.line()
