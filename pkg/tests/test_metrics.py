"""Rate and interference metrics against definitional oracles.

The headline check: total inter-user interference computed straight from the
channel matrices equals the off-diagonal energy of the gain-weighted
correlation matrix.  Both routes are exercised on the same instances.
"""

import math

import numpy as np
import pytest

from svbeam.beamspace import CorrelationMatrix, IndexSelection, decompose, selection_correlation
from svbeam.channel import ChannelSet, SVChannelConfig, generate_sv_channels
from svbeam.errors import ConfigurationError, NumericalError
from svbeam.metrics import (
    LinkBudget,
    interference_direct,
    interference_via_corr,
    pairwise_interference_terms,
    selection_identity_residual,
    spectral_efficiency,
)
from svbeam.selection import GainConstraint, SelectionResult, iosvb, svbs


def make(num_users=3, n_t=8, n_r=4, num_paths=5, seed=201):
    return generate_sv_channels(
        SVChannelConfig(num_users=num_users, n_t=n_t, n_r=n_r, num_paths=num_paths, rng_seed=seed)
    )


def oracle_rate(channels, result, budget):
    """Triple-loop transcription of the sum-rate definition."""
    sel = result.selection
    U, n_s = sel.num_users, sel.streams_per_user
    p = budget.total_transmit_power / (U * n_s)
    eta = n_s * budget.noise_power
    total = 0.0
    for k in range(U):
        hk = channels.matrices[k]
        wk = result.w_io[:, k * n_s:(k + 1) * n_s]
        sig = 0.0
        interf = 0.0
        for i in range(U):
            fi = result.f_io[:, i * n_s:(i + 1) * n_s]
            e = sum(
                abs(np.vdot(wk[:, a], hk @ fi[:, b])) ** 2
                for a in range(n_s)
                for b in range(n_s)
            )
            if i == k:
                sig = e
            else:
                interf += e
    # one user's rate term at a time, no shared accumulators
        total += math.log2(1.0 + p * sig / (p * interf + eta))
    return total


# ---------------------------------------------------------------------------
# spectral efficiency


def test_rate_matches_definitional_oracle():
    budget = LinkBudget.from_snr_db(25.0)
    for seed in (211, 212, 213):
        chans = make(seed=seed)
        cand = decompose(chans, 3)
        res = iosvb(cand, 2, GainConstraint(0.6))
        assert spectral_efficiency(chans, res, budget) == pytest.approx(
            oracle_rate(chans, res, budget), rel=1e-12
        )


def test_scalar_channel_rate_hand_value():
    # One user, H = [[2]]: signal power 4, stream power 1, noise term 1,
    # so the rate is log2(5).
    chans = ChannelSet(matrices=(np.array([[2.0 + 0j]]),), config_fingerprint="toy", seed=None)
    cand = decompose(chans, 1)
    res = svbs(chans, cand, 1, noise_power=1.0)
    se = spectral_efficiency(chans, res, LinkBudget(total_transmit_power=1.0, noise_power=1.0))
    assert se == pytest.approx(math.log2(5.0), rel=1e-15)


def test_rate_is_monotone_in_noise():
    chans = make(seed=214)
    cand = decompose(chans, 3)
    res = iosvb(cand, 2, GainConstraint(0.6))
    rates = [
        spectral_efficiency(chans, res, LinkBudget(noise_power=n))
        for n in (1e-3, 1e-1, 1e1, 1e3)
    ]
    assert all(a > b for a, b in zip(rates, rates[1:]))


def test_rate_vanishes_as_noise_dominates():
    chans = make(seed=215)
    cand = decompose(chans, 3)
    res = iosvb(cand, 2, GainConstraint(0.6))
    assert spectral_efficiency(chans, res, LinkBudget(noise_power=1e12)) < 1e-6


def test_rate_rejects_mismatched_users():
    chans = make(num_users=2, seed=216)
    other = make(num_users=3, seed=216)
    cand = decompose(other, 3)
    res = iosvb(cand, 2, GainConstraint(0.6))
    with pytest.raises(ConfigurationError):
        spectral_efficiency(chans, res, LinkBudget())


def test_rate_flags_overflow_as_numerical_error():
    chans = ChannelSet(matrices=(np.array([[1e200 + 0j]]),), config_fingerprint="hot", seed=None)
    cand = decompose(chans, 1)
    sel = IndexSelection(ind=np.array([0]), num_users=1, streams_per_user=1, r_sel=1)
    res = SelectionResult(
        selection=sel, f_io=cand.f_sel.copy(), w_io=cand.w_sel.copy(),
        objective_value=0.0, combinations_evaluated=1, elapsed_s=0.0, feasible=True,
    )
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(NumericalError, match="user 0"):
            spectral_efficiency(chans, res, LinkBudget(noise_power=1e-300))


# ---------------------------------------------------------------------------
# interference, two ways


@pytest.mark.parametrize(
    "num_users,n_t,n_r,r_sel,n_s,seed",
    [
        (2, 6, 3, 3, 2, 221),
        (3, 8, 4, 3, 2, 222),
        (3, 8, 4, 4, 1, 223),
        (5, 12, 6, 4, 3, 224),
    ],
)
def test_direct_equals_correlation_route(num_users, n_t, n_r, r_sel, n_s, seed):
    chans = make(num_users, n_t, n_r, seed=seed)
    cand = decompose(chans, r_sel)
    res = iosvb(cand, n_s, GainConstraint(0.6))
    direct = interference_direct(chans, res)
    via = interference_via_corr(selection_correlation(cand, res.selection))
    assert abs(direct - via) <= 1e-9 * max(1.0, direct)


def test_single_user_interference_is_exactly_zero():
    chans = make(num_users=1, seed=225)
    cand = decompose(chans, 3)
    res = iosvb(cand, 2, GainConstraint(0.6))
    assert interference_direct(chans, res) == 0.0
    assert interference_via_corr(selection_correlation(cand, res.selection)) == 0.0


def test_disjoint_transmit_support_kills_interference():
    # Two users whose channels touch disjoint transmit antennas: the selected
    # beams cannot overlap, so the direct interference reading is noise-floor.
    rng = np.random.default_rng(226)
    a = rng.normal(size=(2, 4)) + 1j * rng.normal(size=(2, 4))
    b = rng.normal(size=(2, 4)) + 1j * rng.normal(size=(2, 4))
    h0 = np.hstack([a, np.zeros((2, 4))])
    h1 = np.hstack([np.zeros((2, 4)), b])
    chans = ChannelSet(matrices=(h0, h1), config_fingerprint="disjoint", seed=None)
    cand = decompose(chans, 2)
    res = iosvb(cand, 1, GainConstraint(0.6))
    assert interference_direct(chans, res) <= 1e-9


def test_interference_scales_with_squared_channel_gain():
    chans = make(seed=227)
    cand = decompose(chans, 3)
    res = iosvb(cand, 2, GainConstraint(0.6))
    base = interference_direct(chans, res)
    scaled_set = ChannelSet(
        matrices=tuple(2.0 * h for h in chans.matrices),
        config_fingerprint="scaled",
        seed=None,
    )
    # same beams, doubled channel: every |w^H H f|^2 term picks up a factor 4
    assert interference_direct(scaled_set, res) == pytest.approx(4.0 * base, rel=1e-12)


def test_via_corr_hand_values():
    assert interference_via_corr(
        CorrelationMatrix(entries=np.diag([5.0, 2.0, 7.0]).astype(complex), labels=np.arange(3))
    ) == 0.0
    m = CorrelationMatrix(entries=np.array([[1.0, 2.0], [2.0, 1.0]], dtype=complex),
                          labels=np.arange(2))
    assert interference_via_corr(m) == pytest.approx(8.0, rel=1e-15)


def test_off_diagonal_energy_decomposes_into_cross_terms():
    # For any product matrix M = A^T B, the off-diagonal energy equals the
    # sum of the individual ordered cross-term energies.
    rng = np.random.default_rng(228)
    a = rng.normal(size=(6, 4)) + 1j * rng.normal(size=(6, 4))
    b = rng.normal(size=(6, 4)) + 1j * rng.normal(size=(6, 4))
    m = a.T @ b
    lhs = float(np.sum(np.abs(m) ** 2) - np.sum(np.abs(np.diag(m)) ** 2))
    rhs = sum(
        abs(np.dot(a[:, i], b[:, k])) ** 2 for i in range(4) for k in range(4) if i != k
    )
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, lhs)


# ---------------------------------------------------------------------------
# per-pair terms (dual-route)


def test_pairwise_terms_agree_on_random_instances():
    for seed in (231, 232):
        chans = make(seed=seed)
        cand = decompose(chans, 3)
        res = iosvb(cand, 2, GainConstraint(0.6))
        for k in range(3):
            for i in range(3):
                if k == i:
                    continue
                direct, factored = pairwise_interference_terms(
                    chans, cand, res.selection, k, i
                )
                assert abs(direct - factored) <= 1e-9 * max(1.0, direct)


def test_pairwise_terms_identical_channels_give_gain_energy():
    h = make(num_users=1, seed=233).matrices[0]
    chans = ChannelSet(matrices=(h, h.copy()), config_fingerprint="twins", seed=None)
    cand = decompose(chans, 3)
    sel = IndexSelection(ind=np.array([0, 1, 3, 4]), num_users=2, streams_per_user=2, r_sel=3)
    direct, factored = pairwise_interference_terms(chans, cand, sel, 0, 1)
    want = float(np.sum(cand.sigma[[0, 1]] ** 2))  # beams coincide pairwise
    assert direct == pytest.approx(want, rel=1e-9)
    assert factored == pytest.approx(want, rel=1e-9)


def test_pairwise_terms_validation():
    chans = make(seed=234)
    cand = decompose(chans, 3)
    res = iosvb(cand, 2, GainConstraint(0.6))
    with pytest.raises(ConfigurationError):
        pairwise_interference_terms(chans, cand, res.selection, 1, 1)
    with pytest.raises(ConfigurationError):
        pairwise_interference_terms(chans, cand, res.selection, 0, 7)


# ---------------------------------------------------------------------------
# receive-side selector identity


def test_identity_channel_residual_is_zero():
    chans = ChannelSet(matrices=(np.eye(3, dtype=complex),), config_fingerprint="eye", seed=None)
    sel = IndexSelection(ind=np.array([0]), num_users=1, streams_per_user=1, r_sel=3)
    assert selection_identity_residual(chans, sel, 0) <= 1e-12


def test_residual_is_round_off_scale_on_random_instances():
    for seed in (241, 242, 243):
        chans = make(seed=seed)
        cand = decompose(chans, 3)
        res = iosvb(cand, 2, GainConstraint(0.6))
        for k in range(chans.num_users):
            assert selection_identity_residual(chans, res.selection, k) <= 1e-9


def test_residual_wide_matrix():
    chans = make(num_users=1, n_t=48, n_r=8, num_paths=12, seed=244)
    sel = IndexSelection(ind=np.array([0, 2, 5]), num_users=1, streams_per_user=3, r_sel=6)
    assert selection_identity_residual(chans, sel, 0) <= 1e-9


def test_residual_validates_user_index():
    chans = make(seed=245)
    sel = IndexSelection(ind=np.array([0, 3, 6]), num_users=3, streams_per_user=1, r_sel=3)
    with pytest.raises(ConfigurationError):
        selection_identity_residual(chans, sel, 3)


# ---------------------------------------------------------------------------
# link budget


def test_link_budget_from_snr():
    b = LinkBudget.from_snr_db(25.0)
    assert b.total_transmit_power == 1.0
    assert b.noise_power == pytest.approx(10.0 ** -2.5, rel=1e-15)
    c = LinkBudget.from_snr_db(10.0, total_transmit_power=2.0)
    assert c.noise_power == pytest.approx(0.2, rel=1e-15)


def test_link_budget_validation():
    with pytest.raises(ConfigurationError):
        LinkBudget(total_transmit_power=0.0)
    with pytest.raises(ConfigurationError):
        LinkBudget(noise_power=-1.0)
    with pytest.raises(ConfigurationError):
        LinkBudget(noise_power=math.inf)
    with pytest.raises(ConfigurationError):
        LinkBudget.from_snr_db(math.nan)
