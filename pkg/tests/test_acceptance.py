"""The ten acceptance criteria at their stated tolerances.

Each test prints the criterion's pass/fail line; the lines are repeated
in the terminal summary so a plain ``pytest`` run shows all ten together.
"""

import pytest

from muchlab import verify as V

LINES: dict[int, str] = {}


@pytest.mark.parametrize("criterion", V.CRITERIA, ids=lambda f: f.__name__)
def test_acceptance(criterion):
    result = criterion()
    line = result.summary_line()
    LINES[result.number] = line
    print(line)
    for note in result.notes:
        print(f"    {note}")
    assert result.passed, line
