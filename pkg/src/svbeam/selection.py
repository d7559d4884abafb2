"""Beam-subset selection algorithms.

Three selectors over the per-user SVD candidates produced by
:func:`svbeam.beamspace.decompose`:

``svbs``     exhaustive sum-rate maximisation (the slow reference: it prices
             every combination straight from the channel matrices),
``iosvb``    exhaustive interference minimisation under a total-gain floor,
``g_iosvb``  greedy per-stream interference minimisation, one beam per user
             per iteration, with a per-iteration gain floor.

All three enumerate per-user combinations lexicographically and break score
ties the same way: smaller interference objective, then larger selected-gain
sum, then the lexicographically smallest index vector.  Results are therefore
bit-reproducible for identical inputs regardless of internal chunking.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .beamspace import (
    CandidateBeams,
    IndexSelection,
    correlation_entries,
    interference_objective,
    selection_correlation,
)
from .channel import ChannelSet
from .errors import BudgetExceededError, ConfigurationError

__all__ = [
    "DEFAULT_BUDGET",
    "GainConstraint",
    "SelectionResult",
    "svbs",
    "iosvb",
    "g_iosvb",
]

DEFAULT_BUDGET = 10_000_000

_SCAN_CHUNK = 1 << 20

# Below this many cell*user^2 scoring operations a plain Python loop beats
# the vectorised scan (ndarray call overhead dominates at toy sizes).  Both
# paths implement identical ordering semantics, so the switch never changes
# a result, only how fast it arrives.
_SMALL_SCAN_OPS = 4096


@dataclass(frozen=True)
class GainConstraint:
    """Feasibility floor: selected-gain sum must exceed gamma * sigma_max.

    ``sigma_max`` is the reference maximum for the current search scope; when
    None it defaults to the best attainable value (sum over users of their
    top stream gains).  ``gamma`` may be a scalar or a length-1 sequence.
    """

    gamma: float | tuple[float, ...]
    sigma_max: float | None = None

    def __post_init__(self) -> None:
        for g in self.gammas():
            if not (0.0 < g < 1.0):
                raise ConfigurationError(f"gamma must lie in (0, 1), got {g}")
        if self.sigma_max is not None and not (self.sigma_max >= 0.0 and math.isfinite(self.sigma_max)):
            raise ConfigurationError("sigma_max must be a finite nonnegative real")

    def gammas(self) -> tuple[float, ...]:
        g = self.gamma
        return (float(g),) if isinstance(g, (int, float)) else tuple(float(x) for x in g)


@dataclass(frozen=True, eq=False)
class SelectionResult:
    """Outcome of one selection run.

    ``f_io`` / ``w_io`` are the selected transmit/receive beam columns copied
    verbatim from the candidates, user-major.  ``elapsed_s`` covers only the
    selection phase (candidate decomposition is timed by the caller), and
    ``feasible`` is False only when a gain floor could not be met and the
    maximum-gain fallback was returned instead.
    """

    selection: IndexSelection
    f_io: np.ndarray
    w_io: np.ndarray
    objective_value: float
    combinations_evaluated: int
    elapsed_s: float
    feasible: bool


class _Cell(NamedTuple):
    obj2: float
    gain: float
    flat: int


def _scan_small(dims, gain_tabs, obj1_tabs, obj2_tabs, *, base, threshold):
    """Python-loop twin of :func:`_scan_product` for tiny search spaces."""
    gains = [t.tolist() for t in gain_tabs]
    ones = [t.tolist() for t in obj1_tabs]
    pairs = [(k, i, tab.tolist()) for (k, i), tab in obj2_tabs.items()]
    bf_o = bf_g = bf_flat = None
    bg_o = bg_g = bg_flat = None
    total = 0
    for flat, cell in enumerate(itertools.product(*(range(d) for d in dims))):
        g = 0.0
        o = base
        for k, ik in enumerate(cell):
            g += gains[k][ik]
            o += ones[k][ik]
        for k, i, tab in pairs:
            o += tab[cell[k]][cell[i]]
        if g > threshold and (bf_flat is None or o < bf_o or (o == bf_o and g > bf_g)):
            bf_o, bf_g, bf_flat = o, g, flat
        if bg_flat is None or g > bg_g or (g == bg_g and o < bg_o):
            bg_o, bg_g, bg_flat = o, g, flat
        total = flat + 1
    feas_cell = None if bf_flat is None else _Cell(bf_o, bf_g, bf_flat)
    return feas_cell, _Cell(bg_o, bg_g, bg_flat), total


def _scan_product(dims, gain_tabs, obj1_tabs, obj2_tabs, *, base, threshold,
                  chunk=_SCAN_CHUNK):
    """Score every cell of the product space prod(dims), lexicographically.

    gain(cell)  = sum_k gain_tabs[k][i_k]
    obj2(cell)  = base + sum_k obj1_tabs[k][i_k] + sum_{(k,i)} obj2_tabs[(k,i)][i_k, i_i]

    Returns (best_feasible, best_by_gain, total): the first is the cell
    minimising (obj2, -gain, flat) among cells with gain > threshold (None if
    none qualifies), the second maximises gain with (-gain, obj2, flat) order
    over all cells.  Scanning in flat chunks keeps memory bounded while
    reproducing a sequential left-to-right scan exactly.
    """
    U = len(dims)
    total = 1
    for d in dims:
        total *= d
    # Fold each (i, k) table into its (k, i) partner transposed: obj2 touches
    # every unordered pair once instead of twice, identically on both paths.
    sym = {}
    for (k, i), tab in obj2_tabs.items():
        if k > i and (i, k) in obj2_tabs:
            continue
        partner = obj2_tabs.get((i, k)) if k < i else None
        sym[(k, i)] = tab if partner is None else tab + partner.T
    if total * U * U <= _SMALL_SCAN_OPS:
        return _scan_small(dims, gain_tabs, obj1_tabs, sym,
                           base=base, threshold=threshold)
    strides = [1] * U
    for k in range(U - 2, -1, -1):
        strides[k] = strides[k + 1] * dims[k + 1]

    best_feas: tuple | None = None
    best_gain: tuple | None = None
    for lo in range(0, total, chunk):
        hi = min(lo + chunk, total)
        flat = np.arange(lo, hi, dtype=np.int64)
        idx = [(flat // strides[k]) % dims[k] for k in range(U)]
        obj2 = np.full(hi - lo, base, dtype=np.float64)
        gain = np.zeros(hi - lo, dtype=np.float64)
        for k in range(U):
            obj2 += obj1_tabs[k][idx[k]]
            gain += gain_tabs[k][idx[k]]
        for (k, i), tab in sym.items():
            obj2 += tab[idx[k], idx[i]]

        j = int(np.argmax(gain))
        g0 = float(gain[j])
        tie = gain == g0
        m0 = float(np.where(tie, obj2, np.inf).min())
        jj = int(np.argmax(tie & (obj2 == m0)))
        cand = (-g0, m0, lo + jj)
        if best_gain is None or cand < best_gain:
            best_gain = cand

        feas = gain > threshold
        if feas.any():
            m = float(np.where(feas, obj2, np.inf).min())
            tie = feas & (obj2 == m)
            g1 = float(np.where(tie, gain, -np.inf).max())
            jj = int(np.argmax(tie & (gain == g1)))
            cand = (m, -g1, lo + jj)
            if best_feas is None or cand < best_feas:
                best_feas = cand

    feas_cell = None if best_feas is None else _Cell(best_feas[0], -best_feas[1], best_feas[2])
    gain_cell = _Cell(best_gain[1], -best_gain[0], best_gain[2])
    return feas_cell, gain_cell, total


def _check_streams(cand: CandidateBeams, n_s: int) -> None:
    if n_s < 1:
        raise ConfigurationError("n_s must be >= 1")
    if n_s > cand.r_sel:
        raise ConfigurationError(f"n_s={n_s} exceeds r_sel={cand.r_sel}")


def _subset_tables(cand: CandidateBeams, n_s: int, csq: np.ndarray):
    """Per-user lookup tables over the C(r_sel, n_s) local subsets."""
    combos = list(itertools.combinations(range(cand.r_sel), n_s))
    member = np.zeros((len(combos), cand.r_sel))
    for ci, c in enumerate(combos):
        member[ci, list(c)] = 1.0

    gain_tabs, obj1_tabs, obj2_tabs = [], [], {}
    for k in range(cand.num_users):
        bk = cand.user_slice(k)
        gain_tabs.append(member @ cand.sigma[bk])
        kk = csq[bk, bk]
        obj1_tabs.append(((member @ kk) * member).sum(axis=1) - member @ np.diag(kk))
        for i in range(cand.num_users):
            if i != k:
                obj2_tabs[(k, i)] = member @ csq[bk, cand.user_slice(i)] @ member.T
    return combos, gain_tabs, obj1_tabs, obj2_tabs


def _assemble(cand: CandidateBeams, per_user_globals, n_s: int):
    ind = np.fromiter((int(g) for block in per_user_globals for g in block),
                      dtype=np.int64, count=cand.num_users * n_s)
    sel = IndexSelection(ind=ind, num_users=cand.num_users,
                         streams_per_user=n_s, r_sel=cand.r_sel)
    # advanced indexing already yields fresh arrays
    return sel, cand.f_sel[:, ind], cand.w_sel[:, ind]


def default_sigma_max(cand: CandidateBeams, n_s: int) -> float:
    """Best attainable gain sum: each user's n_s strongest candidates."""
    return float(sum(cand.sigma[cand.user_slice(k)][:n_s].sum() for k in range(cand.num_users)))


def iosvb(cand: CandidateBeams, n_s: int, constraint: GainConstraint,
          budget: int = DEFAULT_BUDGET) -> SelectionResult:
    """Exhaustive interference minimisation over per-user beam subsets.

    Searches all C(r_sel, n_s)^num_users unordered per-user subsets for the
    smallest off-diagonal correlation energy among combinations whose summed
    singular values exceed gamma * sigma_max.  When nothing is feasible the
    maximum-gain combination is returned with ``feasible=False`` so callers
    always get a usable beam set.
    """
    _check_streams(cand, n_s)
    gammas = constraint.gammas()
    if len(gammas) != 1:
        raise ConfigurationError("iosvb uses a single gamma, not a schedule")
    n_combos = math.comb(cand.r_sel, n_s)
    total = n_combos ** cand.num_users
    if total > budget:
        raise BudgetExceededError(
            f"iosvb needs {total} combination evaluations "
            f"(C({cand.r_sel},{n_s})^{cand.num_users}), over the budget of {budget}; "
            f"pass a larger budget explicitly to proceed")

    t0 = time.perf_counter()
    csq = np.abs(correlation_entries(cand)) ** 2
    combos, gain_tabs, obj1_tabs, obj2_tabs = _subset_tables(cand, n_s, csq)
    sigma_max = constraint.sigma_max
    if sigma_max is None:
        sigma_max = default_sigma_max(cand, n_s)
    feas_cell, gain_cell, scanned = _scan_product(
        [n_combos] * cand.num_users, gain_tabs, obj1_tabs, obj2_tabs,
        base=0.0, threshold=gammas[0] * sigma_max)
    feasible = feas_cell is not None
    cell = feas_cell if feasible else gain_cell
    combo_ids = np.unravel_index(cell.flat, (n_combos,) * cand.num_users)
    per_user = [k * cand.r_sel + np.asarray(combos[c], dtype=np.int64)
                for k, c in enumerate(combo_ids)]
    sel, f_io, w_io = _assemble(cand, per_user, n_s)
    # cell.obj2 is exactly the restricted off-diagonal energy the scan ranked
    elapsed = time.perf_counter() - t0
    return SelectionResult(
        selection=sel, f_io=f_io, w_io=w_io, objective_value=math.sqrt(cell.obj2),
        combinations_evaluated=scanned, elapsed_s=elapsed, feasible=feasible)


def g_iosvb(cand: CandidateBeams, n_s: int,
            gammas: float | Sequence[float] = 0.6) -> SelectionResult:
    """Greedy per-stream interference minimisation.

    Iteration m picks one not-yet-chosen beam per user, jointly over all
    (r_sel - m + 1)^num_users tuples, minimising the cumulative off-diagonal
    correlation energy of everything committed so far.  A tuple is feasible
    when its summed gain exceeds gamma_m times the best remaining per-user
    gains; an infeasible iteration falls back to its maximum-gain tuple and
    marks the whole result infeasible.

    ``gammas`` is a scalar (applied every iteration) or a length-n_s
    schedule.  Total work is sum_m (r_sel - m + 1)^num_users evaluations —
    polynomial where the exhaustive searches are combinatorial.
    """
    _check_streams(cand, n_s)
    if isinstance(gammas, (int, float)):
        schedule = (float(gammas),) * n_s
    else:
        schedule = tuple(float(g) for g in gammas)
        if len(schedule) != n_s:
            raise ConfigurationError(f"gamma schedule has {len(schedule)} entries, expected {n_s}")
    for g in schedule:
        if not (0.0 < g < 1.0):
            raise ConfigurationError(f"gamma must lie in (0, 1), got {g}")

    t0 = time.perf_counter()
    U = cand.num_users
    csq = np.abs(correlation_entries(cand)) ** 2
    remaining = [list(range(cand.r_sel)) for _ in range(U)]
    picked = [[] for _ in range(U)]
    cross_committed = np.zeros(U * cand.r_sel)
    cumulative = 0.0
    evaluated = 0
    feasible = True

    for m, gamma_m in enumerate(schedule, start=1):
        width = cand.r_sel - m + 1  # every user has shed the same number of beams
        flat_cur = [k * cand.r_sel + loc for k in range(U) for loc in remaining[k]]
        all_cur = np.asarray(flat_cur, dtype=np.int64)
        sig_cur = cand.sigma[all_cur]
        com_cur = cross_committed[all_cur]
        sub = csq[all_cur[:, None], all_cur]
        gain_tabs = [sig_cur[k * width:(k + 1) * width] for k in range(U)]
        obj1_tabs = [com_cur[k * width:(k + 1) * width] for k in range(U)]
        obj2_tabs = {(k, i): sub[k * width:(k + 1) * width, i * width:(i + 1) * width]
                     for k in range(U) for i in range(U) if k != i}
        sigma_max_m = float(sum(t.max() for t in gain_tabs))
        feas_cell, gain_cell, scanned = _scan_product(
            [width] * U, gain_tabs, obj1_tabs, obj2_tabs,
            base=cumulative, threshold=gamma_m * sigma_max_m)
        evaluated += scanned
        cell = feas_cell
        if cell is None:
            feasible = False
            cell = gain_cell
        cumulative = cell.obj2
        flat_id = cell.flat
        chosen = []
        for k in range(U - 1, -1, -1):
            flat_id, local_id = divmod(flat_id, width)
            g = flat_cur[k * width + local_id]
            picked[k].append(g)
            chosen.append(g)
            remaining[k].remove(g - k * cand.r_sel)
        cross_committed += csq[:, chosen].sum(axis=1) + csq[chosen, :].sum(axis=0)

    sel, f_io, w_io = _assemble(cand, picked, n_s)
    # `cumulative` is the committed off-diagonal energy — the objective itself
    elapsed = time.perf_counter() - t0
    return SelectionResult(
        selection=sel, f_io=f_io, w_io=w_io, objective_value=math.sqrt(cumulative),
        combinations_evaluated=evaluated, elapsed_s=elapsed, feasible=feasible)


def svbs(channels: ChannelSet, cand: CandidateBeams, n_s: int, noise_power: float,
         total_power: float = 1.0, budget: int = DEFAULT_BUDGET) -> SelectionResult:
    """Exhaustive sum-rate maximisation — the brute-force reference.

    Evaluates the downlink spectral efficiency of every per-user beam subset
    combination directly from the channel matrices: each signal and each
    interference term is priced as its own ``W^H H F`` product, with no
    precomputation shared across combinations or across terms.  This selector
    exists to price the search the expensive way, which is what makes it a
    meaningful runtime baseline.  Ties keep the lexicographically smallest
    index vector.
    """
    _check_streams(cand, n_s)
    if channels.num_users != cand.num_users:
        raise ConfigurationError("channel set and candidates disagree on user count")
    if not (noise_power > 0.0 and math.isfinite(noise_power)):
        raise ConfigurationError("noise_power must be positive and finite")
    if not (total_power > 0.0 and math.isfinite(total_power)):
        raise ConfigurationError("total_power must be positive and finite")
    U = cand.num_users
    n_combos = math.comb(cand.r_sel, n_s)
    total = n_combos ** U
    if total > budget:
        raise BudgetExceededError(
            f"svbs needs {total} combination evaluations "
            f"(C({cand.r_sel},{n_s})^{U}), over the budget of {budget}; "
            f"pass a larger budget explicitly to proceed")

    t0 = time.perf_counter()
    combos = list(itertools.combinations(range(cand.r_sel), n_s))
    glob = [[k * cand.r_sel + np.asarray(c, dtype=np.int64) for c in combos] for k in range(U)]
    p_stream = total_power / (U * n_s)
    eta = n_s * noise_power

    best_rate = -np.inf
    best_ids = None
    for ids in itertools.product(range(n_combos), repeat=U):
        rate = 0.0
        for k in range(U):
            w_k = cand.w_sel[:, glob[k][ids[k]]]
            sig = np.abs(w_k.conj().T @ channels.matrices[k] @ cand.f_sel[:, glob[k][ids[k]]]) ** 2
            interf = 0.0
            for i in range(U):
                if i != k:
                    interf += (np.abs(w_k.conj().T @ channels.matrices[k]
                                      @ cand.f_sel[:, glob[i][ids[i]]]) ** 2).sum()
            rate += np.log2(1.0 + p_stream * sig.sum() / (p_stream * interf + eta))
        if rate > best_rate:
            best_rate = rate
            best_ids = ids

    per_user = [glob[k][best_ids[k]] for k in range(U)]
    sel, f_io, w_io = _assemble(cand, per_user, n_s)
    elapsed = time.perf_counter() - t0
    return SelectionResult(
        selection=sel, f_io=f_io, w_io=w_io,
        objective_value=interference_objective(selection_correlation(cand, sel)),
        combinations_evaluated=total, elapsed_s=elapsed, feasible=True)
