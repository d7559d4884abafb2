"""Command-line front end.

Subcommands: gen-channels, run, sweep-gamma, sweep-grid, report-iterations.
Exit codes: 0 success, 2 configuration error, 3 search budget exceeded,
4 I/O or channel-file parse error, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .channel import SVChannelConfig, generate_sv_channels, save_channels
from .errors import (
    BudgetExceededError,
    ChannelFormatError,
    ConfigurationError,
    NumericalError,
)
from .harness import ExperimentConfig

__all__ = ["main"]


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise ConfigurationError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise ConfigurationError(f"expected comma-separated integers, got {text!r}") from exc


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config)
    return cfg.override(seed=args.seed, snr_db=_floats(args.snr) if args.snr else None,
                        realizations=args.realizations, budget=args.budget)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_gen_channels(args) -> int:
    try:
        raw = json.loads(Path(args.config).read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {args.config}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {args.config} is not valid JSON: {exc}") from exc
    chan = raw.get("channel", raw)
    if "import_path" in chan:
        raise ConfigurationError("gen-channels needs generation parameters, not an import_path")
    seed = args.seed if args.seed is not None else raw.get("run", {}).get("seed", 0)
    try:
        cfg = SVChannelConfig(
            num_users=int(chan["num_users"]), n_t=int(chan["n_t"]), n_r=int(chan["n_r"]),
            num_paths=int(chan["num_paths"]), rng_seed=int(seed),
            tx_array=harness._parse_geometry(chan.get("tx_array"), int(chan["n_t"])),
            rx_array=harness._parse_geometry(chan.get("rx_array"), int(chan["n_r"])),
        )
    except KeyError as exc:
        raise ConfigurationError(f"channel config missing key {exc}") from exc
    channels = generate_sv_channels(cfg)
    manifest = save_channels(channels, _out_dir(args) / "channels.json", encoding=args.encoding)
    print(f"wrote {channels.num_users} {channels.n_r}x{channels.n_t} channels to {manifest}")
    return 0


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    records = harness.run_experiment(cfg)
    path = harness.write_csv(_out_dir(args) / "runs.csv", harness.RUN_HEADER, records)
    print(f"wrote {len(records)} records to {path}")
    return 0


def _cmd_sweep_gamma(args) -> int:
    cfg = _load_config(args)
    g1 = _floats(args.gamma1_grid)
    g2 = _floats(args.gamma2_grid)
    rows, summary = harness.sweep_gamma(cfg, g1, g2)
    out = _out_dir(args)
    path = harness.write_csv(out / "gamma_sweep.csv", harness.GAMMA_HEADER, rows)
    (out / "gamma_sweep_summary.json").write_text(json.dumps(summary, indent=1) + "\n")
    print(f"wrote {len(rows)} cells to {path}; argmax at "
          f"({summary['argmax_gamma1']}, {summary['argmax_gamma2']})")
    if summary["model_mismatch"]:
        print("warning: argmax is more than one grid step from the (0.6, 0.6) reference "
              "cell — model-mismatch observation, see gamma_sweep_summary.json",
              file=sys.stderr)
    return 0


def _cmd_sweep_grid(args) -> int:
    cfg = _load_config(args)
    rows = harness.sweep_grid(cfg, _ints(args.r_sel_grid), _ints(args.n_s_grid))
    path = harness.write_csv(_out_dir(args) / "grid_sweep.csv", harness.GRID_HEADER, rows)
    print(f"wrote {len(rows)} rows to {path}")
    return 0


def _cmd_report_iterations(args) -> int:
    rows = harness.report_iterations(_ints(args.r_sel_grid), _ints(args.n_s_grid), args.u)
    path = harness.write_csv(_out_dir(args) / "iterations.csv", harness.ITERATIONS_HEADER, rows)
    print(f"wrote {len(rows)} rows to {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="svbeam",
        description="Singular-vector beam selection experiments and search-size reports.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        if config_required:
            p.add_argument("--config", required=True, help="experiment config JSON")
        p.add_argument("--seed", type=int, default=None, help="override run.seed")
        p.add_argument("--out", default=".", help="output directory (default: .)")

    p = sub.add_parser("gen-channels", help="generate a channel set file")
    common(p)
    p.add_argument("--encoding", default="interleaved-f64-le",
                   choices=["interleaved-f64-le", "json-inline"])
    p.set_defaults(func=_cmd_gen_channels)

    p = sub.add_parser("run", help="run the configured algorithms over realizations")
    common(p)
    p.add_argument("--snr", default=None, help="override link.snr_db (comma-separated dB)")
    p.add_argument("--realizations", type=int, default=None, help="override run.realizations")
    p.add_argument("--budget", type=int, default=None, help="override run.budget")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep-gamma", help="mean greedy SE over a (gamma1, gamma2) grid")
    common(p)
    p.add_argument("--snr", default=None)
    p.add_argument("--realizations", type=int, default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--gamma1-grid", default="0.3,0.4,0.5,0.6,0.7,0.8,0.9")
    p.add_argument("--gamma2-grid", default="0.3,0.4,0.5,0.6,0.7,0.8,0.9")
    p.set_defaults(func=_cmd_sweep_gamma)

    p = sub.add_parser("sweep-grid", help="mean SE/time of both selectors over (r_sel, n_s)")
    common(p)
    p.add_argument("--snr", default=None)
    p.add_argument("--realizations", type=int, default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--r-sel-grid", default="3,4,5,6")
    p.add_argument("--n-s-grid", default="2,3")
    p.set_defaults(func=_cmd_sweep_grid)

    p = sub.add_parser("report-iterations", help="exact and approximate search sizes")
    p.add_argument("--out", default=".")
    p.add_argument("--r-sel-grid", default="3,4,5,6")
    p.add_argument("--n-s-grid", default="2,3,4,5,6")
    p.add_argument("--u", type=int, default=5, help="number of users (default 5)")
    p.set_defaults(func=_cmd_report_iterations)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3
    except (ChannelFormatError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
