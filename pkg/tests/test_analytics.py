"""Tests for the iteration-count and gain-ratio formulas.

The closed-form greedy count is checked against a direct summation oracle
over the full domain the formulas promise to cover, and the Bernoulli
generator is pinned to the standard second-kind table (B_1 = -1/2).
"""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svbeam.analytics import (
    bernoulli,
    gain_ratio_exact,
    gain_ratio_stirling,
    n_iter_exhaustive,
    n_iter_greedy_closed,
    n_iter_greedy_direct,
)
from svbeam.errors import ConfigurationError

# Second-kind Bernoulli numbers, i.e. the convention with B_1 = -1/2.
# Transcribed from the standard table (independent of the recurrence in
# the module under test).
BERNOULLI_TABLE = {
    0: Fraction(1),
    1: Fraction(-1, 2),
    2: Fraction(1, 6),
    3: Fraction(0),
    4: Fraction(-1, 30),
    5: Fraction(0),
    6: Fraction(1, 42),
    7: Fraction(0),
    8: Fraction(-1, 30),
    9: Fraction(0),
    10: Fraction(5, 66),
    11: Fraction(0),
    12: Fraction(-691, 2730),
    13: Fraction(0),
    14: Fraction(7, 6),
    15: Fraction(0),
    16: Fraction(-3617, 510),
    17: Fraction(0),
    18: Fraction(43867, 798),
    19: Fraction(0),
    20: Fraction(-174611, 330),
}


def oracle_greedy_count(r_sel: int, n_s: int, num_users: int) -> int:
    # Straight transcription of the per-stage scan width: at stage m each
    # user has r_sel - m + 1 surviving candidates.
    return sum((r_sel - m + 1) ** num_users for m in range(1, n_s + 1))


def oracle_exhaustive_count(r_sel: int, n_s: int, num_users: int) -> int:
    return math.comb(r_sel, n_s) ** num_users


class TestBernoulli:
    def test_matches_standard_table(self):
        for j, want in BERNOULLI_TABLE.items():
            got = bernoulli(j)
            assert got == want, f"B_{j}: got {got}, want {want}"
            assert isinstance(got, Fraction)

    def test_b12_spot_value(self):
        assert bernoulli(12) == Fraction(-691, 2730)

    @given(st.integers(min_value=1, max_value=15))
    def test_odd_indices_above_one_vanish(self, k):
        assert bernoulli(2 * k + 1) == 0

    @given(st.integers(min_value=1, max_value=24))
    @settings(max_examples=24)
    def test_defining_recurrence(self, n):
        # sum_{k=0}^{n} C(n+1, k) B_k = 0 for every n >= 1
        acc = sum(math.comb(n + 1, k) * bernoulli(k) for k in range(n + 1))
        assert acc == 0

    def test_negative_index_rejected(self):
        with pytest.raises(ConfigurationError):
            bernoulli(-1)


class TestIterationCounts:
    @pytest.mark.parametrize(
        "r_sel,n_s,num_users,want",
        [
            (4, 2, 5, 7776),
            (5, 2, 5, 100000),
            (5, 3, 5, 100000),
            (6, 3, 5, 3200000),
        ],
    )
    def test_exhaustive_pinned_values(self, r_sel, n_s, num_users, want):
        assert n_iter_exhaustive(r_sel, n_s, num_users) == want

    @pytest.mark.parametrize(
        "r_sel,n_s,num_users,want",
        [
            (4, 2, 5, 1267),
            (5, 2, 5, 4149),
            (5, 3, 5, 4392),
            (6, 3, 5, 11925),
        ],
    )
    def test_greedy_pinned_values(self, r_sel, n_s, num_users, want):
        assert n_iter_greedy_direct(r_sel, n_s, num_users) == want
        assert n_iter_greedy_closed(r_sel, n_s, num_users) == want

    def test_counts_are_python_ints(self):
        for fn in (n_iter_exhaustive, n_iter_greedy_direct, n_iter_greedy_closed):
            v = fn(6, 3, 5)
            assert type(v) is int

    def test_exhaustive_matches_oracle_small_domain(self):
        for r in range(1, 9):
            for n in range(1, r + 1):
                for u in (1, 2, 4, 7):
                    assert n_iter_exhaustive(r, n, u) == oracle_exhaustive_count(r, n, u)

    def test_greedy_direct_matches_oracle_small_domain(self):
        for r in range(1, 9):
            for n in range(1, r + 1):
                for u in (1, 2, 4, 7):
                    assert n_iter_greedy_direct(r, n, u) == oracle_greedy_count(r, n, u)

    @given(
        r_sel=st.integers(min_value=1, max_value=12),
        n_s=st.integers(min_value=1, max_value=12),
        num_users=st.integers(min_value=1, max_value=10),
    )
    @settings(max_examples=120)
    def test_closed_form_equals_direct_sum(self, r_sel, n_s, num_users):
        if n_s > r_sel:
            with pytest.raises(ConfigurationError):
                n_iter_greedy_closed(r_sel, n_s, num_users)
            return
        assert n_iter_greedy_closed(r_sel, n_s, num_users) == n_iter_greedy_direct(
            r_sel, n_s, num_users
        )

    def test_single_stream_collapses_to_single_stage(self):
        # n_s = 1 means one scan of r_sel^U cells and C(r,1)^U = r^U combos.
        for r in (2, 5, 9):
            for u in (1, 3, 6):
                assert n_iter_greedy_direct(r, 1, u) == r**u
                assert n_iter_exhaustive(r, 1, u) == r**u

    def test_strictly_monotone_in_each_argument(self):
        base = (6, 3, 5)
        for fn in (n_iter_exhaustive, n_iter_greedy_direct):
            v0 = fn(*base)
            assert fn(7, 3, 5) > v0
            assert fn(6, 4, 5) > v0 or fn is n_iter_exhaustive  # see below
            assert fn(6, 3, 6) > v0
        # Exhaustive count in n_s is unimodal (binomial), not monotone;
        # the greedy scan count always grows with the number of stages.
        assert n_iter_greedy_direct(6, 4, 5) > n_iter_greedy_direct(6, 3, 5)

    def test_domain_errors(self):
        for fn in (n_iter_exhaustive, n_iter_greedy_direct, n_iter_greedy_closed):
            with pytest.raises(ConfigurationError):
                fn(4, 5, 2)  # more streams than candidates
            with pytest.raises(ConfigurationError):
                fn(4, 0, 2)
            with pytest.raises(ConfigurationError):
                fn(0, 0, 2)
            with pytest.raises(ConfigurationError):
                fn(4, 2, 0)


class TestGainRatio:
    def test_ratio_pinned_values(self):
        assert gain_ratio_exact(4, 2, 5) == pytest.approx(7776 / 1267, rel=1e-12)
        assert gain_ratio_exact(5, 3, 5) == pytest.approx(100000 / 4392, rel=1e-12)

    def test_ratio_is_one_for_single_stream_full_width(self):
        # With n_s = 1 both searches scan exactly r_sel^U cells.
        for r in (2, 4, 9):
            for u in (1, 2, 5):
                assert gain_ratio_exact(r, 1, u) == pytest.approx(1.0, abs=1e-15)

    def test_stirling_tracks_exact_at_moderate_size(self):
        exact = gain_ratio_exact(8, 2, 3)
        approx_ = gain_ratio_stirling(8, 2, 3)
        assert approx_ > 0
        assert abs(approx_ - exact) / exact < 0.25

    def test_stirling_error_shrinks_as_problem_grows(self):
        small = abs(gain_ratio_stirling(8, 2, 3) - gain_ratio_exact(8, 2, 3)) / gain_ratio_exact(
            8, 2, 3
        )
        large = abs(gain_ratio_stirling(20, 4, 5) - gain_ratio_exact(20, 4, 5)) / gain_ratio_exact(
            20, 4, 5
        )
        assert large < small

    def test_stirling_small_case_same_order_of_magnitude(self):
        exact = gain_ratio_exact(4, 2, 5)
        approx_ = gain_ratio_stirling(4, 2, 5)
        assert approx_ > 0
        assert 0.1 < approx_ / exact < 10.0

    def test_stirling_requires_strict_headroom(self):
        with pytest.raises(ConfigurationError):
            gain_ratio_stirling(4, 4, 2)  # n_s == r_sel: no surviving-width decay

    def test_exact_ratio_domain(self):
        with pytest.raises(ConfigurationError):
            gain_ratio_exact(3, 4, 2)
