"""
Invariant suites behind `mimlab verify`.

Each suite runs a group of numerical checks and returns a SuiteReport. Hard
checks decide the exit status; soft checks are reported with their statistics
but never fail a run (the uniform floor is one: it does not hold for
near-uniform distributions).
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from mimlab import mim_core, param_select, stream_model
from mimlab.config import DEFAULT_SEED
from mimlab.distributions import FiniteDistribution, make_distribution
from mimlab.errors import NumericalError, ValidationError
from mimlab.utils import parse_grid

logger = logging.getLogger(__name__)

SUITES = ("properties", "select", "stream", "all")

DEFAULT_SAMPLES = 1000
DEFAULT_GRID = "0.02:0.45:0.01"
DEFAULT_REPLICAS = 100_000
DEFAULT_RUNS = 100

# Substream purposes for the suites
DIST_STREAM = 101
ANTISYMMETRY_STREAM = 102
DECREASING_STREAM = 103


@dataclass
class CheckResult:
    name: str
    cases: int = 0
    failures: int = 0
    hard: bool = True
    stats: Dict[str, Any] = field(default_factory=dict)
    example: Optional[Dict[str, Any]] = None

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def record(self, ok: bool, **case: Any) -> bool:
        self.cases += 1
        if not ok:
            self.failures += 1
            if self.example is None:
                self.example = case
        return ok

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["passed"] = self.passed
        return data


@dataclass
class SuiteReport:
    suite: str
    seed: int
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(check.passed for check in self.checks if check.hard)

    def hard_failures(self) -> List[CheckResult]:
        return [c for c in self.checks if c.hard and not c.passed]

    def extend(self, other: "SuiteReport") -> None:
        self.checks.extend(other.checks)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "ok": self.ok,
            "checks": [check.to_dict() for check in self.checks],
        }


def _rel_close(a: float, b: float, rel: float) -> bool:
    return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


def random_distributions(
    count: int, seed: int, min_n: int = 2, max_n: int = 10
) -> Iterator[FiniteDistribution]:
    """Seeded symmetric-Dirichlet samples with n drawn from min_n..max_n."""
    rng = stream_model.substream(seed, DIST_STREAM, 0)
    for _ in range(count):
        n = int(rng.integers(min_n, max_n + 1))
        probs = rng.dirichlet(np.ones(n))
        if np.any(probs <= 0.0):
            # gamma underflow
            probs = np.maximum(probs, 1e-300)
        yield make_distribution(probs, renormalize=True)


# ============================================================================
# MIM properties
# ============================================================================


def properties_suite(
    samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED, progress: bool = False
) -> SuiteReport:
    if samples < 1:
        raise ValidationError("must be >= 1", field="samples")
    principal = CheckResult("principal_component")
    increasing = CheckResult("increasing_in_omega")
    chain = CheckResult("chain_rule_ordering")
    lower = CheckResult("lower_bound_chain")
    zero = CheckResult("zero_omega")
    naive = CheckResult("matches_naive_sum")
    floor = CheckResult("uniform_floor", hard=False)
    worst_gap = math.inf

    dists = random_distributions(samples, seed)
    for dist in tqdm(dists, total=samples, desc="properties", disable=not progress):
        probs = dist.probs

        for j, p_j in enumerate(probs):
            i = mim_core.dominant_index(dist, 1.0 / p_j)
            principal.record(
                abs(probs[i] - p_j) <= 1e-6 * p_j,
                probs=list(probs),
                focus=j,
                dominant=i,
            )

        omega_max = 1.0 / min(probs)
        grid = np.linspace(0.0, omega_max, 21)
        values = [mim_core.evaluate(dist, w) for w in grid]
        increasing.record(
            all(b > a for a, b in zip(values, values[1:])),
            probs=list(probs),
            omegas=grid.tolist(),
            values=values,
        )

        ordered = mim_core.chain_rule_values(dist)
        for (p_a, l_a), (p_b, l_b) in zip(ordered, ordered[1:]):
            ok = l_b > l_a if p_a - p_b > 1e-9 else l_b >= l_a - 1e-12 * abs(l_a)
            chain.record(ok, probs=list(probs), pair=[[p_a, l_a], [p_b, l_b]])

        bounds = mim_core.lower_bound_report(dist)
        for j in range(dist.n):
            focused = mim_core.focused_mim(dist, j)
            slack = 1e-12 * max(1.0, abs(focused))
            lower.record(
                focused >= bounds.at_inv_pmax - slack
                and bounds.at_inv_pmax > bounds.at_one,
                probs=list(probs),
                focus=j,
                focused=focused,
                at_inv_pmax=bounds.at_inv_pmax,
                at_one=bounds.at_one,
            )

        zero.record(mim_core.evaluate(dist, 0.0) == 0.0, probs=list(probs))

        p = dist.as_array()
        for omega in (1.0, 1.0 / max(probs)):
            direct = float(np.log(np.sum(p * np.exp(omega * (1.0 - p)))))
            stable = mim_core.evaluate(dist, omega)
            naive.record(
                _rel_close(stable, direct, 1e-10),
                probs=list(probs),
                omega=omega,
                stable=stable,
                naive=direct,
            )

        gap = mim_core.uniform_gap(dist)
        worst_gap = min(worst_gap, gap)
        floor.record(gap >= -1e-12, probs=list(probs), gap=gap)

    floor.stats["worst_gap"] = worst_gap

    stability = CheckResult("tiny_probability_stability")
    for p_min in (1e-10, 1e-12):
        dist = make_distribution([p_min, 1.0 - p_min])
        omega = 1.0 / p_min
        value = mim_core.evaluate(dist, omega)
        approx = math.log(p_min) + omega * (1.0 - p_min)
        stability.record(
            math.isfinite(value) and abs(value - approx) <= 1e-6 * abs(approx),
            p_min=p_min,
            value=value,
            dominant_term=approx,
        )

    report = SuiteReport("properties", seed)
    report.checks = [
        principal,
        increasing,
        chain,
        lower,
        floor,
        zero,
        naive,
        stability,
    ]
    return report


# ============================================================================
# Coefficient selection
# ============================================================================


def select_suite(
    grid: Optional[Sequence[float]] = None,
    seed: int = DEFAULT_SEED,
    samples: int = 200,
) -> SuiteReport:
    grid = parse_grid(DEFAULT_GRID) if grid is None else [float(p) for p in grid]
    solved = CheckResult("root_residual")
    bracket = CheckResult("root_in_bracket")
    above_four = CheckResult("coefficient_above_four")
    stationary = CheckResult("stationarity")
    dominance = CheckResult("dominance_at_root")
    taylor = CheckResult("taylor_ratio")
    decreasing = CheckResult("decreasing_in_p")
    taylor_decreasing = CheckResult("taylor_decreasing", hard=False)

    worst = 0.0
    for p in grid:
        try:
            result = param_select.solve_coefficient_exact(p)
        except NumericalError as e:
            solved.record(False, p=p, error=str(e))
            continue
        w = result.omega_star
        worst = max(worst, result.residual)
        solved.record(result.residual < 1e-8, p=p, residual=result.residual)
        bracket.record(1.0 / p < w < 2.0 / p, p=p, omega_star=w)
        above_four.record(w > 4.0, p=p, omega_star=w)
        t_value, t_slope = param_select.stationarity_derivative(p, w)
        stationary.record(
            abs(t_slope) < 1e-6 * abs(t_value), p=p, T=t_value, dT=t_slope
        )
        z = param_select.dominance_margin(p, w)
        dominance.record(z >= 0.0, p=p, z=z)
        if 0.05 - 1e-12 <= p <= 0.45 + 1e-12:
            ratio = param_select.taylor_coefficient(p) / w
            taylor.record(0.5 <= ratio <= 2.0, p=p, ratio=ratio)
    solved.stats["max_residual"] = worst
    try:
        trend = param_select.coefficient_monotonicity_check(grid)
    except (NumericalError, ValidationError) as e:
        decreasing.record(False, grid=list(grid), error=str(e))
    else:
        decreasing.record(trend.exact_decreasing, grid=trend.grid, roots=trend.exact)
        taylor_decreasing.record(
            trend.taylor_decreasing, grid=trend.grid, taylor=trend.taylor
        )

    antisymmetry = CheckResult("antisymmetry")
    rng = stream_model.substream(seed, ANTISYMMETRY_STREAM, 0)
    for p, w in zip(rng.uniform(0.0, 1.0, samples), rng.uniform(0.0, 20.0, samples)):
        p, w = float(p), float(w)
        if not 0.0 < p < 1.0:
            continue
        total = param_select.g(p, w) + param_select.g(1.0 - p, w)
        scale = (1.0 + p * w) * math.exp(w * (1.0 - p)) + (
            1.0 + (1.0 - p) * w
        ) * math.exp(w * p)
        antisymmetry.record(abs(total) <= 1e-12 * scale, p=p, omega=w, sum=total)

    report = SuiteReport("select", seed)
    report.checks = [
        solved,
        bracket,
        above_four,
        stationary,
        dominance,
        taylor,
        decreasing,
        taylor_decreasing,
        antisymmetry,
    ]
    return report


# ============================================================================
# Streaming model
# ============================================================================


def stream_suite(
    replicas: int = DEFAULT_REPLICAS,
    runs: int = DEFAULT_RUNS,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    progress: bool = False,
    p: float = 0.1,
    n_trials: int = 10_000,
) -> SuiteReport:
    """Moments, Chebyshev, exact tail and sandwich checks at (p, N)."""
    moments = stream_model.delta_moments(p, n_trials)
    draws = stream_model.empirical_mim_samples(
        p, n_trials, replicas, seed, workers, progress
    )
    if len(draws.values) < 2:
        raise NumericalError("Monte Carlo produced fewer than two defined draws")
    mc_mean, mc_var = stream_model.sample_moments(draws.values)

    mean_check = CheckResult("delta_mean")
    mean_check.record(
        abs(mc_mean - moments.mean_l) <= 0.01,
        monte_carlo=mc_mean,
        delta_method=moments.mean_l,
    )
    mean_check.stats = {
        "monte_carlo": mc_mean,
        "printed": moments.mean_l,
        "second_order": moments.mean_l_second_order,
        "undefined_draws": draws.undefined,
    }
    second_order = CheckResult("delta_mean_second_order")
    second_order.record(
        abs(mc_mean - moments.mean_l_second_order) <= 0.005,
        monte_carlo=mc_mean,
        second_order=moments.mean_l_second_order,
    )
    variance_check = CheckResult("delta_variance")
    relative = abs(mc_var - moments.var_l) / moments.var_l
    variance_check.record(
        relative <= 0.15, monte_carlo=mc_var, delta_method=moments.var_l
    )
    variance_check.stats = {"relative_error": relative}

    chebyshev = CheckResult("chebyshev_exceedance")
    exceedance = stream_model.chebyshev_exceedance(draws.values, moments, 1.0)
    chebyshev.record(exceedance.holds, **asdict(exceedance))
    chebyshev.stats = {
        "printed_bound": stream_model.chebyshev_report(moments, 1.0).printed_bound
    }

    frequency = stream_model.frequency_moments_check(draws.p_hat, p, n_trials)
    p_hat_check = CheckResult("p_hat_moments")
    p_hat_check.record(frequency.mean_ok, **asdict(frequency))
    p_hat_check.record(frequency.variance_ok, **asdict(frequency))

    model = stream_model.MinorityModel(
        category_probs=make_distribution([0.3, 0.7]), M=100, epsilon=0.1
    )
    exact = stream_model.minority_event_probability(model)
    estimate = stream_model.minority_event_monte_carlo(model, replicas, seed)
    tail = CheckResult("exact_tail_vs_monte_carlo")
    tail.record(
        abs(exact - estimate["estimate"]) <= 3.0 * estimate["standard_error"],
        exact=exact,
        **estimate,
    )

    tail_monotone = CheckResult("tail_nonincreasing_in_epsilon")
    epsilons = np.round(np.arange(0.01, 0.51, 0.01), 12)
    tails = [stream_model.category_tail(100, 0.3, float(e)) for e in epsilons]
    tail_monotone.record(
        all(b <= a for a, b in zip(tails, tails[1:])), epsilons=epsilons.tolist()
    )

    sandwich = CheckResult("sandwich")
    for run in tqdm(range(runs), desc="sandwich", disable=not progress):
        tracker = stream_model.simulate_batches(model, [1000] * 10, seed + run)
        result = stream_model.tracker_sandwich_check(tracker)
        sandwich.record(
            result.ok,
            run_seed=seed + run,
            violations=[asdict(v) for v in result.violations],
        )

    decreasing = CheckResult("empirical_mim_decreasing")
    rng = stream_model.substream(seed, DECREASING_STREAM, 0)
    points = np.unique(rng.uniform(0.0, 1.0, 1000))
    points = points[points > 0.0]
    values = [stream_model.empirical_mim(float(x)) for x in np.append(points, 1.0)]
    decreasing.record(all(b < a for a, b in zip(values, values[1:])))

    union = CheckResult("union_bound")
    for probs, M, eps in (([1 / 3, 1 / 3, 1 / 3], 50, 0.2), ([0.3, 0.7], 100, 0.1)):
        union_model = stream_model.MinorityModel(
            category_probs=make_distribution(probs), M=M, epsilon=eps
        )
        check = stream_model.union_bound_check(union_model, replicas, seed)
        union.record(check.holds, probs=probs, M=M, epsilon=eps, **asdict(check))
        if check.union_exact is not None:
            union.record(
                abs(check.union_estimate - check.union_exact)
                <= 3.0 * check.union_standard_error,
                probs=probs,
                M=M,
                epsilon=eps,
                union_exact=check.union_exact,
                union_estimate=check.union_estimate,
            )

    report = SuiteReport("stream", seed)
    report.checks = [
        mean_check,
        second_order,
        variance_check,
        chebyshev,
        p_hat_check,
        tail,
        tail_monotone,
        sandwich,
        decreasing,
        union,
    ]
    return report


def run_suite(
    suite: str,
    seed: int = DEFAULT_SEED,
    samples: int = DEFAULT_SAMPLES,
    grid: Optional[Sequence[float]] = None,
    replicas: int = DEFAULT_REPLICAS,
    runs: int = DEFAULT_RUNS,
    workers: int = 1,
    progress: bool = False,
) -> SuiteReport:
    if suite not in SUITES:
        raise ValidationError(
            f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}",
            field="suite",
        )
    report = SuiteReport(suite, seed)
    if suite in ("properties", "all"):
        report.extend(properties_suite(samples, seed, progress))
    if suite in ("select", "all"):
        report.extend(select_suite(grid, seed))
    if suite in ("stream", "all"):
        report.extend(stream_suite(replicas, runs, seed, workers, progress))
    for check in report.checks:
        level = logging.INFO if check.passed or not check.hard else logging.ERROR
        passed = check.cases - check.failures
        logger.log(level, "%s: %d/%d passed", check.name, passed, check.cases)
    return report
