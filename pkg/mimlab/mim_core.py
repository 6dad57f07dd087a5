"""
Message importance measure L(p, w) = ln sum_i p_i exp(w (1 - p_i)).

All evaluation goes through log-terms ln p_i + w (1 - p_i) and logsumexp, so
w = 1/p_min stays finite for p_min down to machine scale. Zero-probability
entries are dropped from the sum; focusing operations reject them.
"""

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Tuple

import numpy as np
from scipy.special import logsumexp, softmax

from mimlab.distributions import (
    FiniteDistribution,
    max_prob,
    min_prob,
    require_positive,
    uniform,
)
from mimlab.errors import ValidationError

# Both are plain floats: w >= 0 and L in nats.
ImportanceCoefficient = float
MimValue = float


class LowerBounds(NamedTuple):
    at_inv_pmax: MimValue
    at_one: MimValue


@dataclass(frozen=True)
class TermRow:
    index: int
    prob: float
    log_term: float
    term: float
    share: float
    dominant: bool


def check_omega(omega: float) -> ImportanceCoefficient:
    if isinstance(omega, bool) or not isinstance(omega, (int, float, np.floating)):
        raise ValidationError(f"expected a number, got {omega!r}", field="omega")
    omega = float(omega)
    if not math.isfinite(omega) or omega < 0:
        raise ValidationError(f"must be finite and >= 0, got {omega}", field="omega")
    return omega


def log_terms(dist: FiniteDistribution, omega: float) -> np.ndarray:
    """ln p_i + w (1 - p_i), with -inf where p_i == 0."""
    p = dist.as_array()
    out = np.full(p.shape, -np.inf)
    positive = p > 0
    out[positive] = np.log(p[positive]) + omega * (1.0 - p[positive])
    return out


def evaluate(dist: FiniteDistribution, omega: float) -> MimValue:
    omega = check_omega(omega)
    if omega == 0.0:
        return 0.0
    terms = log_terms(dist, omega)
    return float(logsumexp(terms[np.isfinite(terms)]))


def _check_index(dist: FiniteDistribution, j: int) -> int:
    if isinstance(j, bool) or not isinstance(j, (int, np.integer)):
        raise ValidationError(f"expected an integer index, got {j!r}", field="focus")
    if not 0 <= j < dist.n:
        raise ValidationError(
            f"index {j} out of range for {dist.n} elements", field="focus"
        )
    return int(j)


def coefficient_for_element(dist: FiniteDistribution, j: int) -> ImportanceCoefficient:
    """Focusing rule w_j = 1 / p_j."""
    j = _check_index(dist, j)
    p_j = dist.probs[j]
    if p_j <= 0.0:
        raise ValidationError(f"cannot focus on zero-probability element {j}", "focus")
    return 1.0 / p_j


def focused_mim(dist: FiniteDistribution, j: int) -> MimValue:
    return evaluate(dist, coefficient_for_element(dist, j))


def dominant_index(dist: FiniteDistribution, omega: float) -> int:
    """Index of the largest summand; ties go to the lowest index."""
    return int(np.argmax(log_terms(dist, check_omega(omega))))


def chain_rule_values(dist: FiniteDistribution) -> List[Tuple[float, MimValue]]:
    """(p_j, L_j) for every element, ordered by p_j descending."""
    require_positive(dist, "chain rule")
    order = sorted(range(dist.n), key=lambda i: -dist.probs[i])
    return [(dist.probs[i], focused_mim(dist, i)) for i in order]


def lower_bound_report(dist: FiniteDistribution) -> LowerBounds:
    """L(p, 1/p_max) and L(p, 1); every focused MIM sits above the first."""
    require_positive(dist, "lower bound")
    return LowerBounds(
        at_inv_pmax=evaluate(dist, 1.0 / max_prob(dist)),
        at_one=evaluate(dist, 1.0),
    )


def uniform_gap(dist: FiniteDistribution) -> float:
    """L(p, w0) - L(u, w0) with w0 = 1/p_min and u uniform on the same alphabet."""
    omega0 = 1.0 / min_prob(dist, require_positive=True)
    return evaluate(dist, omega0) - evaluate(uniform(dist.n), omega0)


def mim_derivative(dist: FiniteDistribution, omega: float) -> float:
    """dL/dw = 1 - sum p_i^2 e^{w(1-p_i)} / sum p_i e^{w(1-p_i)}."""
    terms = log_terms(dist, check_omega(omega))
    finite = np.isfinite(terms)
    weights = softmax(terms[finite])
    return float(1.0 - np.dot(weights, dist.as_array()[finite]))


def term_breakdown(dist: FiniteDistribution, omega: float) -> List[TermRow]:
    terms = log_terms(dist, check_omega(omega))
    finite = np.isfinite(terms)
    shares = np.zeros_like(terms)
    shares[finite] = softmax(terms[finite])
    with np.errstate(over="ignore"):
        values = np.exp(terms)
    top = int(np.argmax(terms))
    return [
        TermRow(
            index=i,
            prob=dist.probs[i],
            log_term=float(terms[i]),
            term=float(values[i]),
            share=float(shares[i]),
            dominant=i == top,
        )
        for i in range(dist.n)
    ]
