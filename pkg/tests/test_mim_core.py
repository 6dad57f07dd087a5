"""Unit tests for mim_core module."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mimlab import mim_core
from mimlab.distributions import make_distribution, uniform
from mimlab.errors import ValidationError

positive_weights = st.lists(
    st.floats(min_value=1e-3, max_value=1.0), min_size=2, max_size=10
)

# ============================================================================
# evaluate Tests
# ============================================================================


@pytest.mark.unit
class TestEvaluate:
    """Tests for L(p, w)."""

    def test_uniform_closed_form(self):
        assert mim_core.evaluate(make_distribution([0.5, 0.5]), 2.0) == pytest.approx(
            1.0, abs=1e-12
        )

    @pytest.mark.parametrize("n,omega", [(3, 1.0), (5, 7.5), (11, 40.0)])
    def test_uniform_is_omega_times_one_minus_inverse_n(self, n, omega):
        expected = omega * (1.0 - 1.0 / n)
        assert mim_core.evaluate(uniform(n), omega) == pytest.approx(expected)

    def test_matches_direct_sum(self, skewed_binary):
        expected = math.log(0.2 * math.exp(4.0) + 0.8 * math.exp(1.0))
        assert mim_core.evaluate(skewed_binary, 5.0) == pytest.approx(expected)
        assert expected == pytest.approx(2.5722, abs=1e-4)

    def test_zero_omega_is_exactly_zero(self, sample_distributions):
        for dist in sample_distributions.values():
            assert mim_core.evaluate(dist, 0.0) == 0.0

    def test_zero_entries_contribute_nothing(self):
        with_zero = make_distribution([0.0, 0.4, 0.6])
        without = make_distribution([0.4, 0.6])
        assert mim_core.evaluate(with_zero, 3.0) == pytest.approx(
            mim_core.evaluate(without, 3.0)
        )

    def test_degenerate_distribution(self):
        assert mim_core.evaluate(make_distribution([0.0, 1.0]), 10.0) == 0.0

    def test_tiny_probability_stays_finite(self):
        p_min = 1e-10
        dist = make_distribution([p_min, 1.0 - p_min])
        omega = 1.0 / p_min
        value = mim_core.evaluate(dist, omega)
        approx = math.log(p_min) + omega * (1.0 - p_min)
        assert math.isfinite(value)
        assert value == pytest.approx(approx, rel=1e-6)

    @pytest.mark.parametrize("omega", [-1.0, math.inf, math.nan])
    def test_rejects_bad_omega(self, skewed_binary, omega):
        with pytest.raises(ValidationError, match="omega"):
            mim_core.evaluate(skewed_binary, omega)

    def test_rejects_non_number_omega(self, skewed_binary):
        with pytest.raises(ValidationError):
            mim_core.evaluate(skewed_binary, "2")

    @settings(max_examples=200, deadline=None)
    @given(weights=positive_weights, a=st.floats(0, 50), b=st.floats(0, 50))
    def test_increasing_in_omega(self, weights, a, b):
        dist = make_distribution(weights, renormalize=True)
        low, high = sorted((a, b))
        assert mim_core.evaluate(dist, low) <= mim_core.evaluate(dist, high) + 1e-12

    @settings(max_examples=200, deadline=None)
    @given(weights=positive_weights, omega=st.floats(0, 30))
    def test_agrees_with_naive_sum(self, weights, omega):
        dist = make_distribution(weights, renormalize=True)
        p = dist.as_array()
        naive = float(np.log(np.sum(p * np.exp(omega * (1.0 - p)))))
        assert mim_core.evaluate(dist, omega) == pytest.approx(
            naive, rel=1e-10, abs=1e-12
        )


# ============================================================================
# Focusing Tests
# ============================================================================


@pytest.mark.unit
class TestFocusing:
    """Tests for the w_j = 1/p_j focusing rule."""

    def test_coefficient_for_element(self, skewed_binary):
        assert mim_core.coefficient_for_element(skewed_binary, 0) == 5.0

    def test_focused_mim(self, skewed_binary):
        assert mim_core.focused_mim(skewed_binary, 0) == pytest.approx(
            2.5722, abs=1e-4
        )

    def test_focus_on_zero_probability_rejected(self):
        with pytest.raises(ValidationError, match="zero-probability"):
            mim_core.coefficient_for_element(make_distribution([0.0, 1.0]), 0)

    @pytest.mark.parametrize("index", [-1, 2, 1.0, True])
    def test_bad_index(self, skewed_binary, index):
        with pytest.raises(ValidationError) as excinfo:
            mim_core.coefficient_for_element(skewed_binary, index)
        assert excinfo.value.field == "focus"

    def test_dominant_index_matches_focus(self, sample_distributions):
        tiered = sample_distributions["tiered"]
        for j, p_j in enumerate(tiered.probs):
            assert mim_core.dominant_index(tiered, 1.0 / p_j) == j

    def test_dominant_index_tie_goes_to_lowest(self):
        dist = make_distribution([0.25, 0.25, 0.5])
        assert mim_core.dominant_index(dist, 4.0) == 0

    def test_dominant_index_ignores_zero_entries(self):
        dist = make_distribution([0.0, 0.3, 0.7])
        assert mim_core.dominant_index(dist, 1.0 / 0.3) == 1


# ============================================================================
# Chain rule and bounds Tests
# ============================================================================


@pytest.mark.unit
class TestChainAndBounds:
    def test_chain_rule_ordering(self, sample_distributions):
        values = mim_core.chain_rule_values(sample_distributions["tiered"])
        probs = [p for p, _ in values]
        levels = [level for _, level in values]
        assert probs == sorted(probs, reverse=True)
        assert all(b > a for a, b in zip(levels, levels[1:]))

    def test_chain_rule_rejects_zero_entry(self, sample_distributions):
        with pytest.raises(ValidationError):
            mim_core.chain_rule_values(sample_distributions["with_zero"])

    def test_lower_bounds(self, skewed_binary):
        bounds = mim_core.lower_bound_report(skewed_binary)
        assert bounds.at_inv_pmax == pytest.approx(
            math.log(0.2 * math.e + 0.8 * math.exp(0.25))
        )
        assert bounds.at_one == pytest.approx(
            math.log(0.2 * math.exp(0.8) + 0.8 * math.exp(0.2))
        )
        assert bounds.at_inv_pmax > bounds.at_one
        for j in range(skewed_binary.n):
            assert mim_core.focused_mim(skewed_binary, j) >= bounds.at_inv_pmax - 1e-12

    def test_uniform_gap_positive_for_skewed(self, sample_distributions):
        assert mim_core.uniform_gap(sample_distributions["binary"]) > 0
        assert mim_core.uniform_gap(sample_distributions["rare"]) == pytest.approx(
            math.log(0.1 * math.exp(9.0) + 0.9 * math.e) - 5.0
        )

    def test_uniform_gap_negative_near_uniform(self):
        # The uniform floor fails for mildly skewed binary distributions.
        gap = mim_core.uniform_gap(make_distribution([0.3, 0.7]))
        assert gap == pytest.approx(-0.0579, abs=1e-3)

    def test_uniform_gap_zero_for_uniform(self):
        assert mim_core.uniform_gap(uniform(6)) == pytest.approx(0.0, abs=1e-12)


# ============================================================================
# Derivative and breakdown Tests
# ============================================================================


@pytest.mark.unit
class TestDerivativeAndTerms:
    def test_derivative_uniform(self):
        assert mim_core.mim_derivative(uniform(4), 3.0) == pytest.approx(0.75)

    def test_derivative_degenerate_is_zero(self):
        dist = make_distribution([0.0, 1.0])
        assert mim_core.mim_derivative(dist, 5.0) == pytest.approx(0.0, abs=1e-15)

    def test_derivative_matches_finite_difference(self, skewed_binary):
        h = 1e-6
        slope = (
            mim_core.evaluate(skewed_binary, 3.0 + h)
            - mim_core.evaluate(skewed_binary, 3.0 - h)
        ) / (2 * h)
        assert mim_core.mim_derivative(skewed_binary, 3.0) == pytest.approx(
            slope, rel=1e-6
        )

    def test_term_breakdown(self, skewed_binary):
        rows = mim_core.term_breakdown(skewed_binary, 5.0)
        assert [row.index for row in rows] == [0, 1]
        assert sum(row.share for row in rows) == pytest.approx(1.0)
        assert rows[0].dominant and not rows[1].dominant
        assert rows[0].term == pytest.approx(0.2 * math.exp(4.0))

    def test_term_breakdown_zero_entry(self):
        rows = mim_core.term_breakdown(make_distribution([0.0, 1.0]), 2.0)
        assert rows[0].log_term == -math.inf
        assert rows[0].share == 0.0
        assert rows[1].dominant

    def test_term_breakdown_overflowing_term(self):
        dist = make_distribution([1e-10, 1.0 - 1e-10])
        rows = mim_core.term_breakdown(dist, 1e10)
        assert rows[0].term == math.inf
        assert rows[0].share == pytest.approx(1.0)
