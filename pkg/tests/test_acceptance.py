"""Acceptance battery, one test per criterion.

Runs the same battery as `mppa verify configs/experiment_a.cfg` and turns
each criterion into a test case that prints its PASS/FAIL line.  Slow
(about a minute): the full oracle trial counts and both experiment runs
happen here.
"""

import pytest

from mppa.acceptance import run_all

CRITERIA = ("experiment_a", "experiment_b", "diagnostics",
            "asymptotic_regularity", "oracle_suites",
            "evaluator_equivalence", "monotonicity")


@pytest.fixture(scope="module")
def results(request):
    root = request.config.rootpath
    out = {res.name: res for res in run_all(root / "configs/experiment_a.cfg")}
    assert tuple(out) == CRITERIA
    return out


@pytest.mark.parametrize("name", CRITERIA)
def test_criterion(results, name):
    res = results[name]
    line = f"{'PASS' if res.passed else 'FAIL'} {res.name}: {res.detail}"
    print(line)
    assert res.passed, line
