"""
Minority-subset model and streaming empirical MIM.

A length-M sequence over K categories falls in the minority subset when some
category frequency deviates from its probability by at least epsilon. The
binary reduction tracks one category: m ~ Binomial(M, p_1) and the event is
|m/M - p_1| >= epsilon. Batches of trials feed an EmpiricalTracker holding
the running frequency p_hat = n/N and the empirical MIM

    L_hat = ln(p_hat e^{1/p_hat - 1} + (1 - p_hat) e),

which is undefined (None) while no event has been seen.

Randomness: every draw comes from np.random.default_rng(SeedSequence([seed,
purpose, index])), so a stream depends only on the seed and its own index.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats
from scipy.special import logsumexp
from tqdm import tqdm

from mimlab.config import BOUNDARY_SLACK, DEFAULT_SEED, MC_BLOCK_SIZE
from mimlab.distributions import FiniteDistribution, distribution_from_mapping
from mimlab.errors import NumericalError, ValidationError
from mimlab.input_manager import read_json_source

logger = logging.getLogger(__name__)

# Substream purposes
UNION_STREAM = 1
BATCH_STREAM = 2
MOMENT_STREAM = 3
EVENT_STREAM = 4

TRACKER_COLUMNS = ["i", "delta_n", "delta_N", "n", "N", "p_hat", "L_hat"]

SANDWICH_SLACK = 1e-12


def substream(seed: int, purpose: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, purpose, index]))


# ============================================================================
# Model
# ============================================================================


@dataclass(frozen=True)
class MinorityModel:
    category_probs: FiniteDistribution
    M: int
    epsilon: float

    def __post_init__(self):
        if isinstance(self.M, bool) or not isinstance(self.M, (int, np.integer)):
            raise ValidationError(f"expected an integer, got {self.M!r}", field="M")
        if self.M < 1:
            raise ValidationError(f"must be >= 1, got {self.M}", field="M")
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValidationError(
                f"must be finite and > 0, got {self.epsilon}", field="epsilon"
            )

    @property
    def K(self) -> int:
        return self.category_probs.n

    @property
    def p1(self) -> float:
        return self.category_probs.probs[0]


def load_model(source: str) -> MinorityModel:
    """Model from JSON {"probs": [...], "M": int, "epsilon": real}."""
    data = read_json_source(source, field="model")
    return model_from_mapping(data)


def model_from_mapping(data: Dict[str, Any]) -> MinorityModel:
    for name in ("probs", "M", "epsilon"):
        if name not in data:
            raise ValidationError("missing field", field=name)
    M, epsilon = data["M"], data["epsilon"]
    if isinstance(M, bool) or not isinstance(M, int):
        raise ValidationError(f"expected an integer, got {M!r}", field="M")
    if isinstance(epsilon, bool) or not isinstance(epsilon, (int, float)):
        raise ValidationError(f"expected a number, got {epsilon!r}", field="epsilon")
    dist = distribution_from_mapping(
        {"probs": data["probs"], "renormalize": data.get("renormalize", False)}
    )
    return MinorityModel(category_probs=dist, M=M, epsilon=float(epsilon))


def deviation_mask(M: int, p: float, epsilon: float) -> np.ndarray:
    """Boolean over m = 0..M: |m/M - p| >= epsilon (boundary inclusive)."""
    m = np.arange(M + 1)
    return np.abs(m / M - p) >= epsilon - BOUNDARY_SLACK


def minority_mask(model: MinorityModel) -> np.ndarray:
    return deviation_mask(model.M, model.p1, model.epsilon)


def category_tail(M: int, p: float, epsilon: float) -> float:
    """Exact P(|m/M - p| >= epsilon) for m ~ Binomial(M, p)."""
    mask = deviation_mask(M, p, epsilon)
    masses = stats.binom.pmf(np.arange(M + 1), M, p)
    return math.fsum(masses[mask])


def minority_event_probability(model: MinorityModel) -> float:
    return category_tail(model.M, model.p1, model.epsilon)


def minority_event_monte_carlo(
    model: MinorityModel, trials: int, seed: int = DEFAULT_SEED
) -> Dict[str, float]:
    """Monte Carlo estimate of the event probability with its standard error."""
    if trials < 1:
        raise ValidationError("must be >= 1", field="trials")
    rng = substream(seed, EVENT_STREAM, 0)
    m = rng.binomial(model.M, model.p1, size=trials)
    estimate = float(minority_mask(model)[m].mean())
    return {
        "estimate": estimate,
        "standard_error": math.sqrt(estimate * (1.0 - estimate) / trials),
        "trials": trials,
    }


@dataclass(frozen=True)
class UnionBoundReport:
    tails: List[float]
    union_estimate: float
    union_standard_error: float
    union_exact: Optional[float]
    bound: float
    holds: bool
    p_majority: float
    samples: int


def union_bound_check(
    model: MinorityModel, samples: int = 100_000, seed: int = DEFAULT_SEED
) -> UnionBoundReport:
    """
    Compare the probability that any category deviates (estimated from
    multinomial draws) with K times the largest single-category tail.
    """
    if model.K < 2:
        raise ValidationError("union bound needs K >= 2 categories", field="probs")
    if samples < 1:
        raise ValidationError("must be >= 1", field="samples")
    probs = model.category_probs.as_array()
    tails = [category_tail(model.M, float(p), model.epsilon) for p in probs]
    rng = substream(seed, UNION_STREAM, 0)
    counts = rng.multinomial(model.M, probs, size=samples)
    deviates = np.abs(counts / model.M - probs) >= model.epsilon - BOUNDARY_SLACK
    union = float(deviates.any(axis=1).mean())
    se = math.sqrt(union * (1.0 - union) / samples)
    bound = model.K * max(tails)
    # With two categories m_2 = M - m_1 deviates exactly when m_1 does.
    exact = tails[0] if model.K == 2 else None
    return UnionBoundReport(
        tails=tails,
        union_estimate=union,
        union_standard_error=se,
        union_exact=exact,
        bound=bound,
        holds=union <= bound + 3.0 * se,
        p_majority=1.0 - union,
        samples=samples,
    )


# ============================================================================
# Empirical MIM
# ============================================================================


def _check_p_hat(p_hat: float) -> float:
    p_hat = float(p_hat)
    if not 0.0 <= p_hat <= 1.0:
        raise ValidationError(f"must lie in [0, 1], got {p_hat}", field="p_hat")
    return p_hat


def empirical_mim(p_hat: float) -> Optional[float]:
    """L_hat for a running frequency; None when p_hat == 0."""
    p_hat = _check_p_hat(p_hat)
    if p_hat == 0.0:
        return None
    return float(logsumexp([1.0 / p_hat - 1.0, 1.0], b=[p_hat, 1.0 - p_hat]))


def _empirical_mim_array(p_hat: np.ndarray) -> np.ndarray:
    exponents = np.stack([1.0 / p_hat - 1.0, np.ones_like(p_hat)])
    weights = np.stack([p_hat, 1.0 - p_hat])
    return logsumexp(exponents, b=weights, axis=0)


def empirical_mim_derivative(p: float) -> float:
    """dL_hat/dp = ((1 - 1/p) e^{1/p-2} - 1) / (p e^{1/p-2} + 1 - p)."""
    p = _check_p_hat(p)
    if p == 0.0:
        raise ValidationError("must be > 0", field="p")
    x = 1.0 / p - 2.0
    if x >= 0:
        s = math.exp(-x)
        return ((1.0 - 1.0 / p) - s) / (p + (1.0 - p) * s)
    e = math.exp(x)
    return ((1.0 - 1.0 / p) * e - 1.0) / (p * e + 1.0 - p)


def empirical_mim_second_derivative(p: float) -> float:
    """
    d2L_hat/dp2 for 0 < p < 1/2:

        ((2/p - 1) e^{2/p-4} + (1/p^3 - 1/p^2 - 2/p + 2) e^{1/p-2} - 1)
        / (p e^{1/p-2} + 1 - p)^2
    """
    if not 0.0 < p < 0.5:
        raise ValidationError(f"must lie in (0, 1/2), got {p}", field="p")
    s = math.exp(-(1.0 / p - 2.0))
    c = 1.0 / p**3 - 1.0 / p**2 - 2.0 / p + 2.0
    return ((2.0 / p - 1.0) + c * s - s * s) / (p + (1.0 - p) * s) ** 2


@dataclass(frozen=True)
class MomentEstimates:
    mu: float
    sigma_sq: float
    mean_l: float
    mean_l_second_order: float
    var_l: float
    n_trials: int


def delta_moments(p: float, n_trials: int) -> MomentEstimates:
    """
    Delta-method mean and variance of L_hat when p_hat = Binomial(N, p)/N.

    mean_l follows the published expression, whose curvature term is divided
    by (p e^{1/p-1} + (1-p) e)^2; that is e^2 times the squared denominator
    of L_hat'' itself. mean_l_second_order uses L_hat'' directly.
    """
    if not 0.0 < p < 0.5:
        raise ValidationError(f"must lie in (0, 1/2), got {p}", field="p")
    if isinstance(n_trials, bool) or int(n_trials) != n_trials or n_trials < 1:
        raise ValidationError(f"must be an integer >= 1, got {n_trials}", field="N")
    n_trials = int(n_trials)
    sigma_sq = p * (1.0 - p) / n_trials
    level = empirical_mim(p)
    curvature = empirical_mim_second_derivative(p)
    slope = empirical_mim_derivative(p)
    return MomentEstimates(
        mu=p,
        sigma_sq=sigma_sq,
        mean_l=level + 0.5 * sigma_sq * curvature / math.e**2,
        mean_l_second_order=level + 0.5 * sigma_sq * curvature,
        var_l=slope * slope * sigma_sq,
        n_trials=n_trials,
    )


@dataclass(frozen=True)
class ChebyshevReport:
    epsilon: float
    var_l: float
    bound: float
    printed_bound: float


def chebyshev_bound(moments: MomentEstimates, eps: float) -> float:
    """min(1, D(L_hat) / eps^2)."""
    if not eps > 0:
        raise ValidationError(f"must be > 0, got {eps}", field="eps")
    return min(1.0, moments.var_l / eps**2)


def chebyshev_report(moments: MomentEstimates, eps: float) -> ChebyshevReport:
    return ChebyshevReport(
        epsilon=eps,
        var_l=moments.var_l,
        bound=chebyshev_bound(moments, eps),
        printed_bound=moments.var_l / eps,
    )


@dataclass
class MonteCarloSamples:
    values: np.ndarray
    p_hat: np.ndarray
    undefined: int


@dataclass(frozen=True)
class MonteCarloMoments:
    mean: float
    variance: float
    undefined: int
    replicas: int


def _block_sizes(replicas: int, block: int) -> List[int]:
    full, rest = divmod(replicas, block)
    return [block] * full + ([rest] if rest else [])


def empirical_mim_samples(
    p: float,
    n_trials: int,
    replicas: int,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    progress: bool = False,
) -> MonteCarloSamples:
    """
    Draw p_hat = Binomial(N, p)/N for each replica and map it through L_hat.

    Replicas are split into fixed-size blocks, each with its own substream,
    and gathered in block order, so worker count never changes the result.
    """
    if not 0.0 < p < 1.0:
        raise ValidationError(f"must lie in (0, 1), got {p}", field="p")
    if n_trials < 1:
        raise ValidationError("must be >= 1", field="N")
    if replicas < 2:
        raise ValidationError("must be >= 2", field="replicas")
    sizes = _block_sizes(replicas, MC_BLOCK_SIZE)

    def run_block(index: int) -> np.ndarray:
        rng = substream(seed, MOMENT_STREAM, index)
        return rng.binomial(n_trials, p, size=sizes[index]) / n_trials

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        blocks = list(
            tqdm(
                pool.map(run_block, range(len(sizes))),
                total=len(sizes),
                desc="Monte Carlo",
                unit="block",
                disable=not progress,
            )
        )
    p_hat = np.concatenate(blocks)
    defined = p_hat > 0.0
    return MonteCarloSamples(
        values=_empirical_mim_array(p_hat[defined]),
        p_hat=p_hat,
        undefined=int((~defined).sum()),
    )


def sample_moments(values: np.ndarray) -> Sequence[float]:
    """Mean and unbiased variance with compensated summation."""
    count = len(values)
    mean = math.fsum(values) / count
    variance = math.fsum((values - mean) ** 2) / (count - 1)
    return mean, variance


def monte_carlo_moments(
    p: float,
    n_trials: int,
    replicas: int,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    progress: bool = False,
) -> MonteCarloMoments:
    draws = empirical_mim_samples(p, n_trials, replicas, seed, workers, progress)
    if len(draws.values) < 2:
        raise NumericalError(
            f"{draws.undefined} of {replicas} draws gave p_hat = 0; "
            "not enough defined values for moments"
        )
    mean, variance = sample_moments(draws.values)
    return MonteCarloMoments(
        mean=mean,
        variance=variance,
        undefined=draws.undefined,
        replicas=replicas,
    )


@dataclass(frozen=True)
class FrequencyMomentsReport:
    sample_mean: float
    sample_variance: float
    expected_mean: float
    expected_variance: float
    mean_standard_error: float
    variance_standard_error: float

    @property
    def mean_ok(self) -> bool:
        return abs(self.sample_mean - self.expected_mean) <= 3.0 * (
            self.mean_standard_error
        )

    @property
    def variance_ok(self) -> bool:
        return abs(self.sample_variance - self.expected_variance) <= 3.0 * (
            self.variance_standard_error
        )


def frequency_moments_check(
    p_hat: np.ndarray, p: float, n_trials: int
) -> FrequencyMomentsReport:
    """Compare simulated p_hat with E(p_hat) = p and D(p_hat) = p(1-p)/N."""
    count = len(p_hat)
    mean, variance = sample_moments(p_hat)
    fourth = math.fsum((p_hat - mean) ** 4) / count
    return FrequencyMomentsReport(
        sample_mean=mean,
        sample_variance=variance,
        expected_mean=p,
        expected_variance=p * (1.0 - p) / n_trials,
        mean_standard_error=math.sqrt(variance / count),
        variance_standard_error=math.sqrt(max(fourth - variance**2, 0.0) / count),
    )



def p_hat_moments_check(
    p: float, n_trials: int, replicas: int, seed: int = DEFAULT_SEED
) -> FrequencyMomentsReport:
    draws = empirical_mim_samples(p, n_trials, replicas, seed)
    return frequency_moments_check(draws.p_hat, p, n_trials)


@dataclass(frozen=True)
class ExceedanceReport:
    frequency: float
    standard_error: float
    bound: float
    holds: bool


def chebyshev_exceedance(
    values: np.ndarray, moments: MomentEstimates, eps: float
) -> ExceedanceReport:
    """Share of samples with |L_hat - E(L_hat)| >= eps against the bound."""
    count = len(values)
    frequency = float(np.mean(np.abs(values - moments.mean_l) >= eps))
    se = math.sqrt(frequency * (1.0 - frequency) / count)
    bound = chebyshev_bound(moments, eps)
    return ExceedanceReport(
        frequency=frequency,
        standard_error=se,
        bound=bound,
        holds=frequency <= bound + 3.0 * se,
    )


# ============================================================================
# Tracker
# ============================================================================


@dataclass(frozen=True)
class BatchRecord:
    i: int
    delta_n: int
    delta_N: int
    n: int
    N: int
    p_hat: float
    l_hat: Optional[float]


@dataclass
class EmpiricalTracker:
    records: List[BatchRecord] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.records[-1].n if self.records else 0

    @property
    def N(self) -> int:
        return self.records[-1].N if self.records else 0

    @property
    def p_hat(self) -> Optional[float]:
        return self.records[-1].p_hat if self.records else None

    @property
    def l_hat(self) -> Optional[float]:
        return self.records[-1].l_hat if self.records else None

    def observe(self, delta_n: int, delta_N: int) -> BatchRecord:
        """Add one batch of delta_N trials with delta_n event occurrences."""
        if isinstance(delta_N, bool) or int(delta_N) != delta_N or delta_N < 1:
            raise ValidationError(f"must be an integer >= 1, got {delta_N}", "delta_N")
        if isinstance(delta_n, bool) or int(delta_n) != delta_n:
            raise ValidationError(f"must be an integer, got {delta_n}", "delta_n")
        if not 0 <= delta_n <= delta_N:
            raise ValidationError(
                f"must lie in [0, delta_N={delta_N}], got {delta_n}", "delta_n"
            )
        n = self.n + int(delta_n)
        total = self.N + int(delta_N)
        p_hat = n / total
        record = BatchRecord(
            i=len(self.records) + 1,
            delta_n=int(delta_n),
            delta_N=int(delta_N),
            n=n,
            N=total,
            p_hat=p_hat,
            l_hat=empirical_mim(p_hat),
        )
        self.records.append(record)
        return record

    def to_frame(self) -> pd.DataFrame:
        rows = [
            [r.i, r.delta_n, r.delta_N, r.n, r.N, r.p_hat, r.l_hat]
            for r in self.records
        ]
        frame = pd.DataFrame(rows, columns=TRACKER_COLUMNS)
        frame["L_hat"] = frame["L_hat"].astype(float)
        return frame


def simulate_batches(
    model: MinorityModel,
    batch_sizes: Sequence[int],
    seed: int = DEFAULT_SEED,
    progress: bool = False,
) -> EmpiricalTracker:
    """
    Run batches of independent length-M sequences and count minority events.

    Only m matters for the event, so each trial draws m ~ Binomial(M, p_1)
    directly. Batch i uses its own substream.
    """
    if not batch_sizes:
        raise ValidationError("at least one batch is required", field="batches")
    mask = minority_mask(model)
    tracker = EmpiricalTracker()
    for index, size in enumerate(
        tqdm(batch_sizes, desc="Simulating", unit="batch", disable=not progress)
    ):
        if size < 1:
            raise ValidationError(f"must be positive, got {size}", field="batches")
        rng = substream(seed, BATCH_STREAM, index)
        m = rng.binomial(model.M, model.p1, size=size)
        tracker.observe(int(mask[m].sum()), size)
    return tracker


@dataclass(frozen=True)
class SandwichViolation:
    i: int
    kind: str
    lower: float
    value: float
    upper: float


@dataclass(frozen=True)
class SandwichReport:
    checked: int
    violations: List[SandwichViolation]

    @property
    def ok(self) -> bool:
        return not self.violations


def tracker_sandwich_check(tracker: EmpiricalTracker) -> SandwichReport:
    """
    For every batch after the first, check that the cumulative frequency lies
    between the previous cumulative frequency and the batch frequency (exact
    rational comparison), and that L_hat lies between the matching L_hat
    values (entries with undefined L_hat are skipped).
    """
    violations: List[SandwichViolation] = []
    checked = 0
    for prev, cur in zip(tracker.records, tracker.records[1:]):
        checked += 1
        before = Fraction(prev.n, prev.N)
        batch = Fraction(cur.delta_n, cur.delta_N)
        now = Fraction(cur.n, cur.N)
        if not min(before, batch) <= now <= max(before, batch):
            violations.append(
                SandwichViolation(
                    i=cur.i,
                    kind="p_hat",
                    lower=float(min(before, batch)),
                    value=float(now),
                    upper=float(max(before, batch)),
                )
            )
        batch_l = empirical_mim(cur.delta_n / cur.delta_N)
        if prev.l_hat is None or batch_l is None or cur.l_hat is None:
            continue
        lower, upper = min(prev.l_hat, batch_l), max(prev.l_hat, batch_l)
        slack = SANDWICH_SLACK * max(1.0, abs(lower), abs(upper))
        if not lower - slack <= cur.l_hat <= upper + slack:
            violations.append(
                SandwichViolation(
                    i=cur.i, kind="L_hat", lower=lower, value=cur.l_hat, upper=upper
                )
            )
    for violation in violations:
        logger.warning(
            "sandwich violation at batch %d (%s): %r not in [%r, %r]",
            violation.i,
            violation.kind,
            violation.value,
            violation.lower,
            violation.upper,
        )
    return SandwichReport(checked=checked, violations=violations)
