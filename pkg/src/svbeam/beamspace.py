"""Per-user SVD beam candidates and their cross-correlation bookkeeping.

Decomposing every user's channel yields ``r_sel`` candidate beam triplets
(left vector, singular value, right vector) per user, concatenated user-major
into global candidate columns 0 .. num_users*r_sel - 1.  Selection algorithms
work on the gain-weighted Gram matrix of the transmit candidates:

    C[a, b] = sigma_a * <f_a, f_b>

whose off-diagonal energy is exactly the total inter-user interference power
of the corresponding transmit/receive beam pairs (see ``svbeam.metrics``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet
from .errors import ConfigurationError, NumericalError

__all__ = [
    "CandidateBeams",
    "IndexSelection",
    "CorrelationMatrix",
    "decompose",
    "correlation_entries",
    "candidate_correlation",
    "selection_correlation",
    "interference_objective",
]


@dataclass(frozen=True, eq=False)
class CandidateBeams:
    """Top-``r_sel`` SVD triplets of every user, user-major columns.

    f_sel: (n_t, num_users*r_sel) right singular vectors (transmit beams)
    w_sel: (n_r, num_users*r_sel) left singular vectors (receive beams)
    sigma: matching singular values, descending within each user block
    """

    f_sel: np.ndarray
    w_sel: np.ndarray
    sigma: np.ndarray
    num_users: int
    r_sel: int

    def user_slice(self, k: int) -> slice:
        """Global column range holding user k's candidates."""
        if not 0 <= k < self.num_users:
            raise ConfigurationError(f"user index {k} out of range")
        return slice(k * self.r_sel, (k + 1) * self.r_sel)

    def per_user_range(self, k: int) -> range:
        s = self.user_slice(k)
        return range(s.start, s.stop)


@dataclass(frozen=True, eq=False)
class IndexSelection:
    """One chosen beam subset: ``streams_per_user`` candidates per user.

    ``ind`` stores global candidate-column indices in user-major blocks;
    within a block the order is whatever the selecting algorithm produced
    (ascending for subset searches, pick order for the greedy algorithm).
    """

    ind: np.ndarray
    num_users: int
    streams_per_user: int
    r_sel: int

    def __post_init__(self) -> None:
        ind = np.asarray(self.ind, dtype=np.int64)
        object.__setattr__(self, "ind", ind)
        if ind.shape != (self.num_users * self.streams_per_user,):
            raise ConfigurationError(
                f"selection holds {ind.shape} indices, expected "
                f"({self.num_users * self.streams_per_user},)"
            )
        flat = ind.tolist()  # plain loops: these arrays hold a few dozen ints at most
        for pos, a in enumerate(flat):
            if a < 0 or a // self.r_sel != pos // self.streams_per_user:
                raise ConfigurationError(
                    f"selection {flat} strays outside its per-user candidate blocks")
        # blocks are disjoint, so global uniqueness == per-user uniqueness
        if len(set(flat)) != len(flat):
            raise ConfigurationError(f"selection repeats a beam: {flat}")

    def per_user(self, k: int) -> np.ndarray:
        if not 0 <= k < self.num_users:
            raise ConfigurationError(f"user index {k} out of range")
        return self.ind[k * self.streams_per_user:(k + 1) * self.streams_per_user]

    def per_user_local(self, k: int) -> np.ndarray:
        """User k's selection as offsets into their own candidate block."""
        return self.per_user(k) - k * self.r_sel


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Square complex matrix tagged with the global candidate labels."""

    entries: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        e = np.asarray(self.entries, dtype=np.complex128)
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "labels", labels)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ConfigurationError(f"correlation matrix must be square, got {e.shape}")
        if labels.shape != (e.shape[0],):
            raise ConfigurationError("label count disagrees with matrix order")

    @property
    def order(self) -> int:
        return self.entries.shape[0]


def decompose(channels: ChannelSet, r_sel: int) -> CandidateBeams:
    """SVD every user's channel and keep the ``r_sel`` strongest triplets.

    Columns are phase-normalised so the largest-magnitude entry of each
    transmit beam is real positive; the paired receive beam gets the same
    rotation, which leaves u * sigma * v^H unchanged.  This pins an otherwise
    arbitrary phase so repeated runs produce identical candidates.
    """
    if r_sel < 1:
        raise ConfigurationError("r_sel must be >= 1")
    limit = min(channels.n_r, channels.n_t)
    if r_sel > limit:
        raise ConfigurationError(f"r_sel={r_sel} exceeds min(n_r, n_t)={limit}")

    U = channels.num_users
    f_cols = np.empty((channels.n_t, U * r_sel), dtype=np.complex128)
    w_cols = np.empty((channels.n_r, U * r_sel), dtype=np.complex128)
    sigma = np.empty(U * r_sel, dtype=np.float64)
    for k, h in enumerate(channels.matrices):
        try:
            u, s, vh = np.linalg.svd(h, full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"SVD did not converge for user {k}") from exc
        v = vh.conj().T
        for j in range(r_sel):
            col = k * r_sel + j
            fj = v[:, j]
            wj = u[:, j]
            pivot = fj[np.argmax(np.abs(fj))]
            rot = np.conj(pivot) / np.abs(pivot)
            f_cols[:, col] = fj * rot
            w_cols[:, col] = wj * rot
            sigma[col] = s[j]
    return CandidateBeams(f_sel=f_cols, w_sel=w_cols, sigma=sigma, num_users=U, r_sel=r_sel)


def correlation_entries(cand: CandidateBeams) -> np.ndarray:
    """Raw entries of :func:`candidate_correlation` without the wrapper."""
    gram = cand.f_sel.conj().T @ cand.f_sel
    kept = gram.diagonal().copy()
    for k in range(cand.num_users):
        gram[cand.user_slice(k), cand.user_slice(k)] = 0.0
    np.fill_diagonal(gram, kept)  # the diagonal sits inside the intra blocks
    return cand.sigma[:, None] * gram


def candidate_correlation(cand: CandidateBeams) -> CorrelationMatrix:
    """Gain-weighted Gram matrix of all transmit candidates.

    Within one user the SVD right vectors are orthonormal, so intra-user
    off-diagonal entries vanish in exact arithmetic; they are set to exactly
    zero here rather than carrying O(1e-16) decomposition residue.  That
    keeps single-user instances exactly interference-free, which the
    selection tie-breaks rely on.
    """
    return CorrelationMatrix(entries=correlation_entries(cand),
                             labels=np.arange(cand.num_users * cand.r_sel))


def selection_correlation(cand: CandidateBeams, sel: IndexSelection) -> CorrelationMatrix:
    """Restriction of :func:`candidate_correlation` to the selected columns."""
    if sel.r_sel != cand.r_sel or sel.num_users != cand.num_users:
        raise ConfigurationError("selection does not match these candidates")
    full = candidate_correlation(cand)
    ind = sel.ind
    return CorrelationMatrix(entries=full.entries[np.ix_(ind, ind)], labels=ind.copy())


def interference_objective(corr: CorrelationMatrix | np.ndarray) -> float:
    """Frobenius norm of the off-diagonal part of a square matrix."""
    m = corr.entries if isinstance(corr, CorrelationMatrix) else np.asarray(corr)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigurationError(f"objective needs a square matrix, got {m.shape}")
    energy = np.abs(m) ** 2
    np.fill_diagonal(energy, 0.0)
    return math.sqrt(float(energy.sum()))
