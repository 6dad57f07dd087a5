"""Shared fixtures for tests."""

import os
from pathlib import Path

import pytest

from mimlab.distributions import FiniteDistribution, make_distribution
from mimlab.stream_model import MinorityModel

# Keep library warnings out of captured CLI output unless a test asks for them
if "MIMLAB_LOG_LEVEL" not in os.environ:
    os.environ["MIMLAB_LOG_LEVEL"] = "ERROR"


@pytest.fixture
def skewed_binary() -> FiniteDistribution:
    """The (0.2, 0.8) distribution used throughout the examples."""
    return make_distribution([0.2, 0.8])


@pytest.fixture
def sample_distributions() -> dict:
    """A handful of distributions with different shapes."""
    return {
        "uniform3": make_distribution([1 / 3, 1 / 3, 1 / 3]),
        "binary": make_distribution([0.2, 0.8]),
        "rare": make_distribution([0.1, 0.9]),
        "tiered": make_distribution([0.05, 0.15, 0.3, 0.5]),
        "with_zero": make_distribution([0.0, 0.4, 0.6]),
        "degenerate": make_distribution([0.0, 1.0]),
    }


@pytest.fixture
def minority_model() -> MinorityModel:
    """M=100, p_1=0.3, epsilon=0.1."""
    return MinorityModel(
        category_probs=make_distribution([0.3, 0.7]), M=100, epsilon=0.1
    )


@pytest.fixture
def impossible_model() -> MinorityModel:
    """epsilon > 1 makes the minority event impossible."""
    return MinorityModel(
        category_probs=make_distribution([0.3, 0.7]), M=100, epsilon=2.0
    )


@pytest.fixture
def temp_json_file(tmp_path: Path):
    """Factory fixture writing JSON text to a temporary file."""

    def _create(filename: str, content: str) -> Path:
        path = tmp_path / filename
        path.write_text(content, encoding="utf-8")
        return path

    return _create


@pytest.fixture
def counts_csv(tmp_path: Path):
    """Factory fixture writing a batch-count CSV."""

    def _create(rows, header: str = "delta_n,delta_N") -> Path:
        path = tmp_path / "counts.csv"
        lines = [header] + [",".join(str(v) for v in row) for row in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _create
