"""
Finite probability distributions: validation, generators and JSON ingestion.

Every other module takes a FiniteDistribution, so the checks made here are
the only place input vectors are validated.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from mimlab.config import NORMALIZATION_TOL
from mimlab.errors import ValidationError
from mimlab.input_manager import read_json_source

logger = logging.getLogger(__name__)

GENERATOR_KINDS = (
    "uniform",
    "binomial",
    "truncated-poisson",
    "truncated-geometric",
    "explicit",
)


@dataclass(frozen=True)
class FiniteDistribution:
    probs: Tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.probs)

    @property
    def has_zero(self) -> bool:
        return any(p == 0.0 for p in self.probs)

    @property
    def is_degenerate(self) -> bool:
        return sum(1 for p in self.probs if p > 0.0) == 1

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)


def make_distribution(
    probs: Sequence[float], renormalize: bool = False
) -> FiniteDistribution:
    """
    Validate a probability vector.

    Args:
            probs: Entries p_1..p_n, all >= 0 with at least one > 0
            renormalize: Divide by the sum instead of requiring sum == 1

    Returns:
            The validated distribution

    Raises:
            ValidationError: negative or non-finite entry, all-zero vector, or
                    a sum more than 1e-9 away from 1 without renormalize
    """
    try:
        values = np.asarray(list(probs), dtype=float)
    except (TypeError, ValueError):
        raise ValidationError("entries must be numbers", field="probs") from None
    if values.ndim != 1 or values.size == 0:
        raise ValidationError("must be a non-empty list", field="probs")
    if not np.all(np.isfinite(values)):
        raise ValidationError("entries must be finite", field="probs")
    if np.any(values < 0):
        index = int(np.argmax(values < 0))
        raise ValidationError(
            f"entry {index} is negative ({values[index]})", field="probs"
        )
    total = float(values.sum())
    if total <= 0.0:
        raise ValidationError("all entries are zero", field="probs")
    if renormalize:
        if abs(total - 1.0) > NORMALIZATION_TOL:
            logger.debug("renormalizing probabilities with sum %r", total)
        values = values / total
    elif abs(total - 1.0) > NORMALIZATION_TOL:
        raise ValidationError(
            f"entries sum to {total!r}, not 1 (pass renormalize to rescale)",
            field="probs",
        )
    return FiniteDistribution(probs=tuple(float(v) for v in values))


def uniform(n: int) -> FiniteDistribution:
    if n < 1:
        raise ValidationError("must be >= 1", field="n")
    return FiniteDistribution(probs=(1.0 / n,) * n)


def _require(params: Mapping[str, Any], name: str, cast: type) -> Any:
    if name not in params:
        raise ValidationError("missing parameter", field=name)
    value = params[name]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"expected a number, got {value!r}", field=name)
    if cast is int and float(value) != int(value):
        raise ValidationError(f"expected an integer, got {value!r}", field=name)
    return cast(value)


def _open_unit(value: float, name: str) -> float:
    if not 0.0 < value < 1.0:
        raise ValidationError(f"must lie in (0, 1), got {value}", field=name)
    return value


def _positive_int(value: int, name: str) -> int:
    if value < 1:
        raise ValidationError(f"must be >= 1, got {value}", field=name)
    return value


def generate(spec: GeneratorSpec) -> FiniteDistribution:
    """Build a distribution from a generator description."""
    kind = spec.kind
    params = spec.params
    if kind == "uniform":
        return uniform(_positive_int(_require(params, "n", int), "n"))
    if kind == "binomial":
        trials = _require(params, "n", int)
        if trials < 0:
            raise ValidationError(f"must be >= 0, got {trials}", field="n")
        theta = _open_unit(_require(params, "theta", float), "theta")
        k = np.arange(trials + 1)
        return make_distribution(stats.binom.pmf(k, trials, theta), renormalize=True)
    if kind == "truncated-poisson":
        rate = _require(params, "rate", float)
        if rate <= 0:
            raise ValidationError(f"must be > 0, got {rate}", field="rate")
        support = _positive_int(_require(params, "K", int), "K")
        k = np.arange(support)
        return make_distribution(stats.poisson.pmf(k, rate), renormalize=True)
    if kind == "truncated-geometric":
        q = _open_unit(_require(params, "q", float), "q")
        support = _positive_int(_require(params, "K", int), "K")
        k = np.arange(1, support + 1)
        return make_distribution(stats.geom.pmf(k, q), renormalize=True)
    if kind == "explicit":
        if "probs" not in params:
            raise ValidationError("missing parameter", field="probs")
        return make_distribution(
            params["probs"], renormalize=bool(params.get("renormalize", False))
        )
    raise ValidationError(
        f"unknown kind {kind!r}; expected one of {', '.join(GENERATOR_KINDS)}",
        field="kind",
    )


def min_prob(dist: FiniteDistribution, require_positive: bool = False) -> float:
    value = min(dist.probs)
    if require_positive and value <= 0.0:
        raise ValidationError("distribution has a zero entry", field="probs")
    return value


def max_prob(dist: FiniteDistribution) -> float:
    return max(dist.probs)


def distribution_from_mapping(data: Dict[str, Any]) -> FiniteDistribution:
    """Interpret a decoded JSON object as an explicit vector or a generator."""
    if not isinstance(data, dict):
        raise ValidationError("expected a JSON object", field="dist")
    if "probs" in data:
        probs = data["probs"]
        if not isinstance(probs, list):
            raise ValidationError("must be a list", field="probs")
        renormalize = data.get("renormalize", False)
        if not isinstance(renormalize, bool):
            raise ValidationError("must be true or false", field="renormalize")
        return make_distribution(probs, renormalize=renormalize)
    if "kind" in data:
        params = {k: v for k, v in data.items() if k != "kind"}
        return generate(GeneratorSpec(kind=str(data["kind"]), params=params))
    raise ValidationError("expected a 'probs' or 'kind' field", field="dist")


def require_positive(dist: FiniteDistribution, what: Optional[str] = None) -> None:
    if dist.has_zero:
        detail = f" ({what})" if what else ""
        raise ValidationError(
            f"operation requires every probability > 0{detail}", field="probs"
        )


def load_distribution(source: str) -> FiniteDistribution:
    """Load a distribution from inline JSON or a JSON file path."""
    return distribution_from_mapping(read_json_source(source, field="dist"))
