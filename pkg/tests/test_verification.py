"""
Tests for the verification suites.
"""

import io
import json

import pytest

from majority.exceptions import UnknownSuiteError
from majority.models import VerificationCase
from majority.verification import (
    SIMULATION_SUITES,
    SUITES,
    SuiteOptions,
    all_passed,
    lower_check,
    run_suite,
    upper_check,
    write_cases,
)


@pytest.mark.sanity
class TestChecks:
    """Signed margins of lower and upper checks."""

    def test_lower_check(self):
        case = lower_check("s", "c", "", 0.6, 0.5)
        assert case.margin == pytest.approx(0.1)
        assert case.passed
        assert not lower_check("s", "c", "", 0.4, 0.5).passed

    def test_upper_check(self):
        case = upper_check("s", "c", "", 0.4, 0.5)
        assert case.margin == pytest.approx(0.1)
        assert case.passed
        assert not upper_check("s", "c", "", 0.6, 0.5).passed

    def test_tolerance_absorbs_rounding(self):
        assert lower_check("s", "c", "", 0.5 - 1e-13, 0.5).passed
        assert not lower_check("s", "c", "", 0.5 - 1e-13, 0.5, tolerance=0.0).passed


@pytest.mark.sanity
class TestRunSuite:
    """Registry dispatch, accounting and output."""

    def test_registry(self):
        assert SIMULATION_SUITES <= set(SUITES)
        assert {"pinsker", "lemma1", "lemma2", "prop1", "prop2", "prop4", "prop7", "prop8",
                "chernoff", "dynamics"} <= set(SUITES)

    def test_unknown_suite(self):
        with pytest.raises(UnknownSuiteError):
            run_suite("prop42")

    def test_outcomes_counted(self, metric_value):
        labels = {"suite": "pinsker", "outcome": "passed"}
        before = metric_value("majority_verify_cases_total", labels)
        cases = run_suite("pinsker", SuiteOptions(grid_size=20))
        assert metric_value("majority_verify_cases_total", labels) == before + len(cases)

    def test_write_cases_csv(self):
        cases = [lower_check("prop1", "n=400/epsilon=0.5", "n=400;epsilon=0.5", 0.8, 0.5)]
        handle = io.StringIO()
        write_cases(cases, handle)
        header, row = handle.getvalue().splitlines()
        assert header == "suite,case,params,oracle_value,bound_value,margin,passed"
        assert row.startswith("prop1,n=400/epsilon=0.5,n=400;epsilon=0.5,0.8,0.5,")
        assert row.endswith(",true")

    def test_write_cases_json(self):
        cases = [upper_check("prop8", "n=100/own=0", "", 0.2, 0.3)]
        handle = io.StringIO()
        write_cases(cases, handle, fmt="json")
        data = json.loads(handle.getvalue())
        assert data[0]["suite"] == "prop8"
        assert data[0]["passed"] is True

    def test_all_passed(self):
        good = lower_check("s", "a", "", 1.0, 0.0)
        bad = lower_check("s", "b", "", 0.0, 1.0)
        assert all_passed([good])
        assert not all_passed([good, bad])


@pytest.mark.sanity
class TestOracleSuites:
    """Suites whose inequalities hold exactly."""

    def test_pinsker(self):
        cases = run_suite("pinsker", SuiteOptions(grid_size=200, seed=4))
        assert len(cases) == 2 * 200 + 1
        assert all_passed(cases)

    def test_pinsker_is_seeded(self):
        first = run_suite("pinsker", SuiteOptions(grid_size=5, seed=1))
        second = run_suite("pinsker", SuiteOptions(grid_size=5, seed=1))
        other = run_suite("pinsker", SuiteOptions(grid_size=5, seed=2))
        assert first == second
        assert first != other

    def test_dynamics(self):
        cases = run_suite("dynamics", SuiteOptions(grid_size=25))
        assert len(cases) == 25
        assert all(case.oracle_value == 0.0 for case in cases)
        assert all_passed(cases)

    def test_prop7(self):
        cases = run_suite("prop7", SuiteOptions())
        assert len(cases) == 3 * 4 * 2
        assert all_passed(cases)

    def test_chernoff_tilting_rows(self):
        cases = run_suite("chernoff", SuiteOptions())
        exact_rows = [case for case in cases if not case.case.endswith("/prop3")]
        assert len(exact_rows) == 3 * 4
        assert all_passed(exact_rows)

    def test_surrogate_never_below_exact(self):
        cases = run_suite("prop8", SuiteOptions())
        slack = [case for case in cases if case.case.endswith("surrogate-slack")]
        assert len(slack) == 7
        assert all_passed(slack)

    def test_update_rows_stay_below_prop8_bound(self):
        cases = run_suite("prop8", SuiteOptions())
        upper = [case for case in cases if not case.case.endswith("surrogate-slack")]
        assert len(upper) == 7 * 2
        assert {case.case.rsplit("/", 1)[-1] for case in upper} == {"own=0", "own=1"}
        assert all_passed(upper)

    def test_lemma2_rows(self):
        cases = run_suite("lemma2", SuiteOptions())
        assert len(cases) == 7 * 2
        for case in cases:
            assert isinstance(case, VerificationCase)
            assert 0.0 <= case.oracle_value <= 1.0
            assert "psin=" in case.params
        assert all_passed(cases)


@pytest.mark.slow
class TestHeavySuites:
    """Full oracle grids and desk-scale simulations (minutes)."""

    @pytest.mark.parametrize("name", ["lemma1", "prop1", "prop2", "prop4"])
    def test_oracle_grid(self, name):
        cases = run_suite(name, SuiteOptions())
        failing = [case.case for case in cases if not case.passed]
        assert failing == []

    def test_prop6(self):
        cases = run_suite("prop6", SuiteOptions(trials=300, seed=5))
        assert all_passed(cases)

    def test_stages(self):
        cases = run_suite("stages", SuiteOptions(trials=300, seed=9))
        by_case = {case.case: case for case in cases}
        assert by_case["round0/abs-median"].passed
        assert by_case["round1/median-positive"].passed
        assert by_case["round2/median-positive"].passed
