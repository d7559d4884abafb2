"""Experiment orchestration: seeded Monte-Carlo runs and parameter sweeps.

A JSON config fully determines a run:

    {
      "channel":   {"num_users": 5, "n_t": 144, "n_r": 16, "num_paths": 50}
                   or {"import_path": "channels.json"},
      "selection": {"n_s": 2, "r_sel": 4, "gamma": 0.6},
      "link":      {"snr_db": [25.0], "tx_power": 1.0},
      "run":       {"algorithms": ["svbs", "iosvb", "g-iosvb"],
                    "realizations": 10, "seed": 1, "budget": 10000000}
    }

Realization r draws its channels from a sub-seed hashed out of (seed, r), so
runs are reproducible record-for-record and realizations are independent of
execution order.  Channels are decomposed once per realization and the
decomposition time is reported separately from each algorithm's selection
time.  Output rows are sorted by (realization, snr_db, algo) and floats are
serialized with ``repr``, which makes two runs of the same config byte
identical apart from the timing columns.
"""

from __future__ import annotations

import hashlib
import json
import struct
import time
from dataclasses import dataclass, replace
from pathlib import Path

from .analytics import (
    gain_ratio_exact,
    gain_ratio_stirling,
    n_iter_exhaustive,
    n_iter_greedy_direct,
    n_iter_greedy_closed,
)
from .beamspace import decompose
from .channel import (
    ArrayGeometry,
    ChannelSet,
    SVChannelConfig,
    generate_sv_channels,
    load_channels,
)
from .errors import BudgetExceededError, ConfigurationError
from .metrics import LinkBudget, spectral_efficiency
from .selection import DEFAULT_BUDGET, GainConstraint, g_iosvb, iosvb, svbs

__all__ = [
    "ExperimentConfig",
    "RunRecord",
    "ALGORITHMS",
    "RUN_HEADER",
    "GAMMA_HEADER",
    "GRID_HEADER",
    "ITERATIONS_HEADER",
    "derive_realization_seed",
    "run_experiment",
    "sweep_gamma",
    "sweep_grid",
    "report_iterations",
    "write_csv",
]

ALGORITHMS = ("g-iosvb", "iosvb", "svbs")

RUN_HEADER = "algo,realization,snr_db,se_bps_hz,objective,combinations,select_ms,svd_ms,feasible,seed"
GAMMA_HEADER = "gamma1,gamma2,mean_se"
GRID_HEADER = "r_sel,n_s,algo,mean_se,mean_select_ms,combinations"
ITERATIONS_HEADER = "n_s,r_sel,u,n_exhaustive,n_greedy_direct,n_greedy_closed,gain_exact,gain_stirling"

DEFAULT_GAMMA_GRID = tuple(round(0.3 + 0.1 * i, 1) for i in range(7))


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment needs; see the module docstring schema."""

    n_s: int
    r_sel: int
    gamma: tuple[float, ...] = (0.6,)
    snr_db: tuple[float, ...] = (25.0,)
    tx_power: float = 1.0
    algorithms: tuple[str, ...] = ALGORITHMS
    realizations: int = 1
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    channel: SVChannelConfig | None = None
    import_path: Path | None = None

    def __post_init__(self) -> None:
        if (self.channel is None) == (self.import_path is None):
            raise ConfigurationError("config needs exactly one channel source "
                                     "(generation parameters or import_path)")
        if self.n_s < 1 or self.r_sel < self.n_s:
            raise ConfigurationError(f"need 1 <= n_s <= r_sel, got n_s={self.n_s}, r_sel={self.r_sel}")
        if self.channel is not None and self.r_sel > min(self.channel.n_r, self.channel.n_t):
            raise ConfigurationError(f"r_sel={self.r_sel} exceeds min(n_r, n_t)")
        if len(self.gamma) not in (1, self.n_s):
            raise ConfigurationError(f"gamma must be a single value or one per stream "
                                     f"({self.n_s}), got {len(self.gamma)}")
        for g in self.gamma:
            if not 0.0 < g < 1.0:
                raise ConfigurationError(f"gamma must lie in (0, 1), got {g}")
        if not self.snr_db:
            raise ConfigurationError("need at least one SNR point")
        if not self.algorithms:
            raise ConfigurationError("need at least one algorithm")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ConfigurationError(f"unknown algorithm {a!r}; choose from {ALGORITHMS}")
        if self.realizations < 1:
            raise ConfigurationError("realizations must be >= 1")
        if not (0 <= self.seed < 2**64):
            raise ConfigurationError("seed must fit in an unsigned 64-bit integer")
        if self.budget < 1:
            raise ConfigurationError("budget must be >= 1")

    # -- parsing ----------------------------------------------------------

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(raw, base_dir=path.parent)

    @classmethod
    def from_dict(cls, raw: dict, base_dir: str | Path = ".") -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigurationError("config root must be a JSON object")
        _reject_unknown(raw, {"channel", "selection", "link", "run"}, "config")
        chan = raw.get("channel")
        sel = raw.get("selection")
        if not isinstance(chan, dict) or not isinstance(sel, dict):
            raise ConfigurationError("config needs 'channel' and 'selection' objects")
        link = raw.get("link", {})
        run = raw.get("run", {})
        _reject_unknown(link, {"snr_db", "tx_power"}, "link")
        _reject_unknown(run, {"algorithms", "realizations", "seed", "budget"}, "run")
        _reject_unknown(sel, {"n_s", "r_sel", "gamma"}, "selection")

        seed = int(run.get("seed", 0))
        channel_cfg = None
        import_path = None
        if "import_path" in chan:
            _reject_unknown(chan, {"import_path"}, "channel")
            import_path = Path(base_dir) / str(chan["import_path"])
        else:
            _reject_unknown(chan, {"num_users", "n_t", "n_r", "num_paths",
                                   "tx_array", "rx_array"}, "channel")
            try:
                channel_cfg = SVChannelConfig(
                    num_users=int(chan["num_users"]),
                    n_t=int(chan["n_t"]),
                    n_r=int(chan["n_r"]),
                    num_paths=int(chan["num_paths"]),
                    rng_seed=seed,
                    tx_array=_parse_geometry(chan.get("tx_array"), int(chan["n_t"])),
                    rx_array=_parse_geometry(chan.get("rx_array"), int(chan["n_r"])),
                )
            except KeyError as exc:
                raise ConfigurationError(f"channel config missing key {exc}") from exc

        gamma = sel.get("gamma", 0.6)
        gamma = (float(gamma),) if isinstance(gamma, (int, float)) else tuple(float(g) for g in gamma)
        snr = link.get("snr_db", 25.0)
        snr = (float(snr),) if isinstance(snr, (int, float)) else tuple(float(s) for s in snr)
        algorithms = tuple(run.get("algorithms", ALGORITHMS))

        return cls(
            n_s=int(sel["n_s"]) if "n_s" in sel else _missing("selection.n_s"),
            r_sel=int(sel["r_sel"]) if "r_sel" in sel else _missing("selection.r_sel"),
            gamma=gamma,
            snr_db=snr,
            tx_power=float(link.get("tx_power", 1.0)),
            algorithms=algorithms,
            realizations=int(run.get("realizations", 1)),
            seed=seed,
            budget=int(run.get("budget", DEFAULT_BUDGET)),
            channel=channel_cfg,
            import_path=import_path,
        )

    def override(self, *, seed=None, snr_db=None, realizations=None, budget=None) -> "ExperimentConfig":
        """Apply CLI-level overrides; the seed also re-keys channel generation."""
        cfg = self
        if seed is not None:
            chan = replace(cfg.channel, rng_seed=int(seed)) if cfg.channel is not None else None
            cfg = replace(cfg, seed=int(seed), channel=chan)
        if snr_db is not None:
            cfg = replace(cfg, snr_db=tuple(float(s) for s in snr_db))
        if realizations is not None:
            cfg = replace(cfg, realizations=int(realizations))
        if budget is not None:
            cfg = replace(cfg, budget=int(budget))
        return cfg


def _missing(name: str):
    raise ConfigurationError(f"config missing required key {name!r}")


def _reject_unknown(obj, allowed: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigurationError(f"config section {where!r} must be a JSON object")
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigurationError(f"unknown {where} config keys: {sorted(unknown)}")


def _parse_geometry(spec, side_elements: int) -> ArrayGeometry | None:
    if spec is None:
        return None
    _reject_unknown(spec, {"kind", "rows", "cols", "spacing", "num_elements"}, "array")
    kind = spec.get("kind", "ula")
    spacing = float(spec.get("spacing", 0.5))
    if kind == "ula":
        return ArrayGeometry.ula(int(spec.get("num_elements", side_elements)), spacing)
    if kind == "upa":
        if "rows" not in spec:
            raise ConfigurationError("planar array config needs 'rows'")
        rows = int(spec["rows"])
        cols = int(spec.get("cols", side_elements // rows if rows else 0))
        return ArrayGeometry.upa(rows, cols, spacing)
    raise ConfigurationError(f"unknown array kind {kind!r}")


@dataclass(frozen=True)
class RunRecord:
    """One (realization, SNR, algorithm) outcome, mirroring the CSV schema."""

    algo: str
    realization: int
    snr_db: float
    se_bps_hz: float
    objective: float
    combinations: int
    select_ms: float
    svd_ms: float
    feasible: bool
    seed: int | None

    def csv_row(self) -> str:
        seed = "" if self.seed is None else str(self.seed)
        return ",".join([
            self.algo,
            str(self.realization),
            repr(self.snr_db),
            repr(self.se_bps_hz),
            repr(self.objective),
            str(self.combinations),
            repr(self.select_ms),
            repr(self.svd_ms),
            "true" if self.feasible else "false",
            seed,
        ])


def derive_realization_seed(seed: int, realization: int) -> int:
    """Stable 64-bit sub-seed for one realization (keyed blake2b hash)."""
    digest = hashlib.blake2b(struct.pack("<QQ", seed, realization), digest_size=8).digest()
    return struct.unpack("<Q", digest)[0]


def predicted_combinations(algo: str, r_sel: int, n_s: int, num_users: int) -> int:
    """Search size each algorithm will report, from the exact analytics."""
    if algo in ("svbs", "iosvb"):
        return n_iter_exhaustive(r_sel, n_s, num_users)
    if algo == "g-iosvb":
        return n_iter_greedy_direct(r_sel, n_s, num_users)
    raise ConfigurationError(f"unknown algorithm {algo!r}")


def _check_budget(cfg: ExperimentConfig, num_users: int) -> None:
    for algo in cfg.algorithms:
        needed = predicted_combinations(algo, cfg.r_sel, cfg.n_s, num_users)
        if needed > cfg.budget:
            raise BudgetExceededError(
                f"{algo} needs {needed} combination evaluations at "
                f"r_sel={cfg.r_sel}, n_s={cfg.n_s}, users={num_users}, over the "
                f"budget of {cfg.budget}; raise run.budget explicitly to proceed")


def _channel_realizations(cfg: ExperimentConfig):
    """Yield (realization, sub_seed or None, ChannelSet)."""
    if cfg.import_path is not None:
        imported = load_channels(cfg.import_path)
        if cfg.r_sel > min(imported.n_r, imported.n_t):
            raise ConfigurationError(
                f"r_sel={cfg.r_sel} exceeds min(n_r, n_t) of the imported set")
        for r in range(cfg.realizations):
            yield r, None, imported
    else:
        for r in range(cfg.realizations):
            sub = derive_realization_seed(cfg.seed, r)
            yield r, sub, generate_sv_channels(replace(cfg.channel, rng_seed=sub))


def _run_algorithm(algo: str, channels: ChannelSet, cand, cfg: ExperimentConfig,
                   link: LinkBudget):
    if algo == "svbs":
        return svbs(channels, cand, cfg.n_s, noise_power=link.noise_power,
                    total_power=link.total_transmit_power, budget=cfg.budget)
    if algo == "iosvb":
        if len(cfg.gamma) != 1:
            raise ConfigurationError("iosvb needs a single gamma, not a schedule")
        return iosvb(cand, cfg.n_s, GainConstraint(gamma=cfg.gamma[0]), budget=cfg.budget)
    if algo == "g-iosvb":
        gammas = cfg.gamma[0] if len(cfg.gamma) == 1 else cfg.gamma
        return g_iosvb(cand, cfg.n_s, gammas)
    raise ConfigurationError(f"unknown algorithm {algo!r}")


def run_experiment(cfg: ExperimentConfig) -> list[RunRecord]:
    """Run every (realization, SNR, algorithm) cell and return sorted records."""
    records: list[RunRecord] = []
    checked_budget = False
    for r, sub_seed, channels in _channel_realizations(cfg):
        if not checked_budget:
            _check_budget(cfg, channels.num_users)
            checked_budget = True
        t0 = time.perf_counter()
        cand = decompose(channels, cfg.r_sel)
        svd_ms = (time.perf_counter() - t0) * 1e3
        for snr in cfg.snr_db:
            link = LinkBudget.from_snr_db(snr, cfg.tx_power)
            for algo in sorted(cfg.algorithms):
                result = _run_algorithm(algo, channels, cand, cfg, link)
                se = spectral_efficiency(channels, result, link)
                records.append(RunRecord(
                    algo=algo, realization=r, snr_db=snr, se_bps_hz=se,
                    objective=result.objective_value,
                    combinations=result.combinations_evaluated,
                    select_ms=result.elapsed_s * 1e3, svd_ms=svd_ms,
                    feasible=result.feasible, seed=sub_seed))
    records.sort(key=lambda rec: (rec.realization, rec.snr_db, rec.algo))
    return records


def sweep_gamma(cfg: ExperimentConfig,
                gamma1_grid=DEFAULT_GAMMA_GRID,
                gamma2_grid=DEFAULT_GAMMA_GRID):
    """Mean greedy SE per (gamma1, gamma2) cell; n_s must be 2.

    Returns (rows, summary): rows are (gamma1, gamma2, mean_se) in row-major
    grid order; the summary names the argmax cell and flags whether it sits
    within one grid step of the (0.6, 0.6) reference — when it does not, the
    caller should surface that as a model-mismatch observation, not bury it.
    """
    if cfg.n_s != 2:
        raise ConfigurationError("the gamma sweep explores (gamma1, gamma2); it needs n_s=2")
    g1 = tuple(float(g) for g in gamma1_grid)
    g2 = tuple(float(g) for g in gamma2_grid)
    if not g1 or not g2:
        raise ConfigurationError("gamma grids must be non-empty")
    link = LinkBudget.from_snr_db(cfg.snr_db[0], cfg.tx_power)

    totals = {(a, b): 0.0 for a in g1 for b in g2}
    count = 0
    for _r, _sub, channels in _channel_realizations(cfg):
        cand = decompose(channels, cfg.r_sel)
        count += 1
        for a in g1:
            for b in g2:
                result = g_iosvb(cand, cfg.n_s, (a, b))
                totals[(a, b)] += spectral_efficiency(channels, result, link)

    rows = [(a, b, totals[(a, b)] / count) for a in g1 for b in g2]
    best = max(rows, key=lambda row: row[2])  # ties: first in row-major order
    step1 = min((abs(x - y) for x in g1 for y in g1 if x != y), default=0.0)
    step2 = min((abs(x - y) for x in g2 for y in g2 if x != y), default=0.0)
    within = (abs(best[0] - 0.6) <= step1 + 1e-9) and (abs(best[1] - 0.6) <= step2 + 1e-9)
    summary = {
        "argmax_gamma1": best[0],
        "argmax_gamma2": best[1],
        "max_mean_se": best[2],
        "reference_cell": [0.6, 0.6],
        "within_one_step_of_reference": within,
        "model_mismatch": not within,
    }
    return rows, summary


def sweep_grid(cfg: ExperimentConfig, r_sel_values, n_s_values):
    """Mean SE / selection time of both interference selectors per (r_sel, n_s).

    Channel realizations are shared across cells (paired comparison); each
    r_sel gets its own decomposition.  Cells with n_s > r_sel are skipped.
    """
    r_values = [int(r) for r in r_sel_values]
    n_values = [int(n) for n in n_s_values]
    if not r_values or not n_values:
        raise ConfigurationError("sweep grids must be non-empty")
    link = LinkBudget.from_snr_db(cfg.snr_db[0], cfg.tx_power)
    gamma = cfg.gamma[0] if len(cfg.gamma) == 1 else cfg.gamma

    cells = [(r, n) for r in r_values for n in n_values if n <= r]
    acc = {(r, n, a): [0.0, 0.0, 0] for (r, n) in cells for a in ("g-iosvb", "iosvb")}
    count = 0
    for _r, _sub, channels in _channel_realizations(cfg):
        count += 1
        for r in r_values:
            if r > min(channels.n_r, channels.n_t):
                raise ConfigurationError(f"r_sel={r} exceeds min(n_r, n_t)")
            cand = decompose(channels, r)
            for n in n_values:
                if n > r:
                    continue
                res_g = g_iosvb(cand, n, gamma if not isinstance(gamma, tuple) else gamma[0])
                res_i = iosvb(cand, n, GainConstraint(gamma=gamma if not isinstance(gamma, tuple) else gamma[0]),
                              budget=cfg.budget)
                for a, res in (("g-iosvb", res_g), ("iosvb", res_i)):
                    slot = acc[(r, n, a)]
                    slot[0] += spectral_efficiency(channels, res, link)
                    slot[1] += res.elapsed_s * 1e3
                    slot[2] = res.combinations_evaluated
    rows = []
    for (r, n) in cells:
        for a in ("g-iosvb", "iosvb"):
            se_sum, ms_sum, combos = acc[(r, n, a)]
            rows.append((r, n, a, se_sum / count, ms_sum / count, combos))
    return rows


def report_iterations(r_sel_values, n_s_values, num_users: int):
    """Exact and approximate search-size columns per valid (n_s, r_sel) pair.

    The Stirling ratio column is empty when n_s = r_sel (outside its domain).
    """
    if num_users < 1:
        raise ConfigurationError("num_users must be >= 1")
    rows = []
    for n in n_s_values:
        for r in r_sel_values:
            n, r = int(n), int(r)
            if n < 1 or n > r:
                continue
            stirling = "" if n == r else repr(gain_ratio_stirling(r, n, num_users))
            rows.append((n, r, num_users,
                         n_iter_exhaustive(r, n, num_users),
                         n_iter_greedy_direct(r, n, num_users),
                         n_iter_greedy_closed(r, n, num_users),
                         repr(gain_ratio_exact(r, n, num_users)),
                         stirling))
    return rows


def write_csv(path: str | Path, header: str, rows) -> Path:
    """Serialize rows (floats via repr) under a fixed one-line header."""
    path = Path(path)
    lines = [header]
    for row in rows:
        if isinstance(row, RunRecord):
            lines.append(row.csv_row())
        else:
            lines.append(",".join(
                x if isinstance(x, str) else (repr(x) if isinstance(x, float) else str(x))
                for x in row))
    path.write_text("\n".join(lines) + "\n")
    return path
