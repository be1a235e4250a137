"""The thirteen acceptance criteria, each at its stated tolerance and time budget."""
import pytest

from planarperc import acceptance

from conftest import ACCEPTANCE_LINES


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number):
    res = acceptance.run_criterion(number)
    print(res.line)
    ACCEPTANCE_LINES.append(res.line)
    assert res.passed, res.line
