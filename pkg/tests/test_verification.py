"""Tests for the invariant suites."""

import pytest

from mimlab import param_select, verification
from mimlab.errors import ValidationError
from mimlab.verification import CheckResult, SuiteReport

# ============================================================================
# Report plumbing Tests
# ============================================================================


@pytest.mark.unit
class TestCheckResult:
    def test_counts_and_first_example(self):
        check = CheckResult("demo")
        check.record(True, x=1)
        check.record(False, x=2)
        check.record(False, x=3)
        assert (check.cases, check.failures) == (3, 2)
        assert check.example == {"x": 2}
        assert not check.passed

    def test_soft_failure_keeps_report_ok(self):
        report = SuiteReport("demo", seed=1)
        soft = CheckResult("soft", hard=False)
        soft.record(False)
        hard = CheckResult("hard")
        hard.record(True)
        report.checks = [soft, hard]
        assert report.ok
        assert report.hard_failures() == []

    def test_hard_failure(self):
        report = SuiteReport("demo", seed=1)
        hard = CheckResult("hard")
        hard.record(False, why="bad")
        report.checks = [hard]
        assert not report.ok
        assert report.to_dict()["checks"][0]["passed"] is False

    def test_random_distributions_are_seeded(self):
        a = list(verification.random_distributions(5, seed=4))
        b = list(verification.random_distributions(5, seed=4))
        assert a == b
        assert all(2 <= d.n <= 10 for d in a)


# ============================================================================
# Suite Tests
# ============================================================================


@pytest.mark.unit
class TestSuites:
    def test_properties_suite_passes(self):
        report = verification.properties_suite(samples=100, seed=3)
        assert report.ok, report.hard_failures()
        names = {check.name for check in report.checks}
        assert {"principal_component", "lower_bound_chain", "uniform_floor"} <= names

    def test_uniform_floor_is_soft(self):
        report = verification.properties_suite(samples=200)
        floor = next(c for c in report.checks if c.name == "uniform_floor")
        assert floor.hard is False
        # Near-uniform samples break the floor; the worst gap is recorded.
        assert floor.stats["worst_gap"] < 0
        assert floor.failures > 0

    def test_select_suite_passes(self):
        report = verification.select_suite()
        assert report.ok, report.hard_failures()
        residual = next(c for c in report.checks if c.name == "root_residual")
        assert residual.cases == 44
        assert residual.stats["max_residual"] < 1e-8

    def test_select_suite_custom_grid(self):
        report = verification.select_suite(grid=[0.1, 0.2, 0.3])
        decreasing = next(c for c in report.checks if c.name == "decreasing_in_p")
        assert decreasing.passed

    def test_unknown_suite(self):
        with pytest.raises(ValidationError, match="suite"):
            verification.run_suite("everything")

    def test_properties_rejects_zero_samples(self):
        with pytest.raises(ValidationError, match="samples"):
            verification.properties_suite(samples=0)

    @pytest.mark.slow
    def test_stream_suite_passes(self):
        report = verification.stream_suite(runs=100)
        assert report.ok, report.hard_failures()
        variance = next(c for c in report.checks if c.name == "delta_variance")
        assert variance.stats["relative_error"] <= 0.15

    @pytest.mark.slow
    def test_run_suite_is_deterministic(self):
        first = verification.run_suite("all", samples=50, replicas=20_000, runs=5)
        second = verification.run_suite("all", samples=50, replicas=20_000, runs=5)
        assert first.to_dict() == second.to_dict()


@pytest.mark.unit
class TestSelectTrends:
    def test_trend_checks_use_monotonicity_report(self):
        grid = [0.05, 0.1, 0.2, 0.4]
        report = verification.select_suite(grid=grid)
        trend = param_select.coefficient_monotonicity_check(grid)
        checks = {check.name: check for check in report.checks}
        assert checks["decreasing_in_p"].hard
        assert checks["decreasing_in_p"].passed is trend.exact_decreasing
        taylor = checks["taylor_decreasing"]
        assert taylor.hard is False
        assert taylor.cases == 1
        assert taylor.passed is trend.taylor_decreasing

    def test_grid_outside_half_fails_hard(self):
        report = verification.select_suite(grid=[0.1, 0.6])
        decreasing = next(c for c in report.checks if c.name == "decreasing_in_p")
        assert not decreasing.passed
        assert "grid" in decreasing.example["error"]
