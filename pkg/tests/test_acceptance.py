"""Acceptance criteria 1-10 at full scale; one PASS/FAIL line per criterion.

The lines are printed as each check finishes and repeated in the terminal
summary.  Expect roughly ten minutes in total, most of it in criterion 4.
"""

import pytest

from chebpade.verify import run_all

CRITERIA = {
    1: "symmetry",
    2: "period identities",
    3: "moments of h = 1",
    4: "Bernstein-Szego exactness",
    5: "Jacobi inversion",
    6: "rate check",
    7: "spurious pole localization",
    8: "orbit trichotomy",
    9: "surface identities",
    10: "precision robustness",
}


@pytest.mark.slow
@pytest.mark.parametrize("index", sorted(CRITERIA), ids=[f"C{i}-{CRITERIA[i].replace(' ', '_')}" for i in sorted(CRITERIA)])
def test_criterion(index, acceptance_record):
    [check] = run_all("full", only={index})
    line = check.line()
    print("\n" + line)
    acceptance_record(line)
    assert check.ok, line
