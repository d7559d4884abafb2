"""Link-level metrics and numerical identity checks.

Spectral efficiency follows the equal-power downlink model: each of the
num_users * n_s streams gets total_transmit_power / (num_users * n_s), every
user applies its selected receive beams, and the per-user noise term is
n_s * noise_power (the combiner columns are orthonormal, so combining leaves
the noise power per stream unchanged).

The module also exposes the identity that anchors the interference-based
selectors: total inter-user interference power computed from the raw channel
matrices equals the off-diagonal energy of the selected beam-correlation
matrix.  Both routes are kept as separate code paths on purpose — tests
compare them rather than trusting either alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .beamspace import CandidateBeams, CorrelationMatrix, IndexSelection
from .channel import ChannelSet
from .errors import ConfigurationError, NumericalError
from .selection import SelectionResult

__all__ = [
    "LinkBudget",
    "spectral_efficiency",
    "interference_direct",
    "interference_via_corr",
    "selection_identity_residual",
    "pairwise_interference_terms",
]


@dataclass(frozen=True)
class LinkBudget:
    """Total transmit power and receiver noise power (linear units)."""

    total_transmit_power: float = 1.0
    noise_power: float = 1.0

    def __post_init__(self) -> None:
        if not (self.total_transmit_power > 0.0 and math.isfinite(self.total_transmit_power)):
            raise ConfigurationError("total_transmit_power must be positive and finite")
        if not (self.noise_power > 0.0 and math.isfinite(self.noise_power)):
            raise ConfigurationError("noise_power must be positive and finite")

    @classmethod
    def from_snr_db(cls, snr_db: float, total_transmit_power: float = 1.0) -> "LinkBudget":
        """Noise power from an SNR in dB: noise = power / 10^(snr/10)."""
        if not math.isfinite(snr_db):
            raise ConfigurationError("snr_db must be finite")
        return cls(total_transmit_power=total_transmit_power,
                   noise_power=total_transmit_power / 10.0 ** (snr_db / 10.0))


def _user_effective_power(channels: ChannelSet, result: SelectionResult, k: int) -> np.ndarray:
    """|w^H H_k f|^2 for user k's receive beams against all selected transmit beams."""
    n_s = result.selection.streams_per_user
    w_k = result.w_io[:, k * n_s:(k + 1) * n_s]
    return np.abs(w_k.conj().T @ channels.matrices[k] @ result.f_io) ** 2


def spectral_efficiency(channels: ChannelSet, result: SelectionResult,
                        budget: LinkBudget) -> float:
    """Sum rate in bits/s/Hz of the selected beam pairs under ``budget``."""
    sel = result.selection
    if channels.num_users != sel.num_users:
        raise ConfigurationError("channel set and selection disagree on user count")
    U, n_s = sel.num_users, sel.streams_per_user
    p_stream = budget.total_transmit_power / (U * n_s)
    eta = n_s * budget.noise_power
    rate = 0.0
    for k in range(U):
        eff = _user_effective_power(channels, result, k)
        sig = eff[:, k * n_s:(k + 1) * n_s].sum()
        interf = eff.sum() - sig
        term = np.log2(1.0 + p_stream * sig / (p_stream * interf + eta))
        if not np.isfinite(term):
            raise NumericalError(f"non-finite rate contribution for user {k}")
        rate += float(term)
    return rate


def interference_direct(channels: ChannelSet, result: SelectionResult) -> float:
    """Total inter-user interference power, straight from the channel matrices.

    Sum over user pairs k != i of ||W_k^H H_k F_i||_F^2 (unit stream power).
    """
    sel = result.selection
    if channels.num_users != sel.num_users:
        raise ConfigurationError("channel set and selection disagree on user count")
    U, n_s = sel.num_users, sel.streams_per_user
    total = 0.0
    for k in range(U):
        eff = _user_effective_power(channels, result, k)
        total += eff.sum() - eff[:, k * n_s:(k + 1) * n_s].sum()
    if not math.isfinite(total):
        raise NumericalError("non-finite interference power")
    return total


def interference_via_corr(corr: CorrelationMatrix) -> float:
    """The same total, but read off the selected correlation matrix.

    Equals the squared off-diagonal Frobenius norm; agrees with
    :func:`interference_direct` to within numerical round-off.
    """
    off = corr.entries - np.diag(np.diag(corr.entries))
    return float(np.sum(np.abs(off) ** 2))


def selection_identity_residual(channels: ChannelSet, sel: IndexSelection, user: int) -> float:
    """How far the selected receive beams are from exact basis rows.

    Internally re-decomposes ``user``'s channel at full rank and measures
    ||U^H[rows sel] U - S||_F where S is the 0/1 selector matrix with ones at
    (j, sel_local[j]).  Orthonormality of the left singular basis makes this
    zero in exact arithmetic; expect round-off scale (<= 1e-9).
    """
    if not 0 <= user < channels.num_users:
        raise ConfigurationError(f"user index {user} out of range")
    h = channels.matrices[user]
    try:
        u_full, _, _ = np.linalg.svd(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge for user {user}") from exc
    locs = sel.per_user_local(user)
    prod = u_full[:, locs].conj().T @ u_full
    target = np.zeros_like(prod)
    target[np.arange(len(locs)), locs] = 1.0
    return float(np.linalg.norm(prod - target))


def pairwise_interference_terms(channels: ChannelSet, cand: CandidateBeams,
                                sel: IndexSelection, k: int, i: int) -> tuple[float, float]:
    """One (k, i) interference term computed two independent ways.

    Returns ``(from_channels, from_factors)``: the first is
    ||W_k^H H_k F_i||_F^2 using the raw channel matrix, the second rebuilds
    the same quantity purely from the stored SVD factors,
    ||diag(sigma_k[sel]) (F_k[sel]^H F_i[sel])||_F^2.  They agree to
    round-off; keeping both exposes any drift between decomposition and use.
    """
    if k == i:
        raise ConfigurationError("pairwise term needs two distinct users")
    for u in (k, i):
        if not 0 <= u < cand.num_users:
            raise ConfigurationError(f"user index {u} out of range")
    w_k = cand.w_sel[:, sel.per_user(k)]
    f_i = cand.f_sel[:, sel.per_user(i)]
    direct = float(np.sum(np.abs(w_k.conj().T @ channels.matrices[k] @ f_i) ** 2))

    f_k = cand.f_sel[:, sel.per_user(k)]
    sigma_k = cand.sigma[sel.per_user(k)]
    factored = float(np.sum(np.abs(sigma_k[:, None] * (f_k.conj().T @ f_i)) ** 2))
    return direct, factored
