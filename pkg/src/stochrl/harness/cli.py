"""Command-line interface.

Subcommands: run-tabular, run-deep, bench-stochmax, analyze, summarize.
Exit codes: 0 success, 2 configuration error, 3 failed analysis assertion.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analyze import ANALYSES, run_analysis
from .bench import ALL_SERIES, SELECTION_SERIES, TRAIN_SERIES, bench_stochmax, write_bench_csv
from .config import ConfigError, RunConfig
from .metrics import read_curve, summarize, write_summary_csv
from .runners import run_deep, run_tabular

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ANALYSIS = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stochrl",
        description="Sub-linear stochastic maximization toolkit for value-based RL",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("run-tabular", "run-deep"):
        p = sub.add_parser(name, help=f"{name.replace('-', ' ')} experiment from a config file")
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--seed", type=int, default=None, help="replace the config's seed list")
        p.add_argument("--out", default=None, help="override the output directory")
        p.add_argument("--variant", default=None, help="override the agent variant")
        p.add_argument("--steps", type=int, default=None, help="override total steps")
        p.add_argument("--k", type=int, default=None, help="override the subset size")
        p.add_argument(
            "--memory", choices=("per-state", "global", "none"), default=None,
            help="override the memory mode",
        )

    p = sub.add_parser("bench-stochmax", help="time stochastic vs exact maximization across n")
    p.add_argument("--n", default="64,128,256,512,1024", help="comma-separated action counts")
    p.add_argument("--reps", type=int, default=30, help="timed repetitions per point")
    p.add_argument("--series", choices=("selection", "train", "all"), default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="bench")

    p = sub.add_parser("analyze", help="run one named numerical verification")
    p.add_argument("which", choices=ANALYSES)
    p.add_argument("--out", default="analysis")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--n-states", type=int, default=None)
    p.add_argument("--n-actions", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("summarize", help="aggregate curve files into a summary table")
    p.add_argument("curves", nargs="+", help="curve CSV files")
    p.add_argument("--out", default="summary")
    p.add_argument("--window", type=int, default=1000, help="smoothing window")

    return parser


def _apply_overrides(config: RunConfig, args) -> RunConfig:
    data = config.to_dict()
    if args.variant is not None:
        data["agent"]["variant"] = args.variant
    if args.k is not None:
        data["agent"]["k"] = args.k
    if args.memory is not None:
        data["agent"]["memory"] = args.memory
    if args.steps is not None:
        data["run"]["steps"] = args.steps
    if args.seed is not None:
        data["run"]["seeds"] = [args.seed]
    if args.out is not None:
        data["run"]["out_dir"] = args.out
    return RunConfig.from_dict(data)


def _cmd_run(args, deep: bool) -> int:
    config = _apply_overrides(RunConfig.from_file(args.config), args)
    result = run_deep(config) if deep else run_tabular(config)
    window = 100 if deep else 1000
    if config.metrics:
        from .plots import save_omega_figure, save_reward_figure

        curves = {
            config.variant: [read_curve(r.curve_path) for r in result.seed_results if r.curve_path]
        }
        fig = save_reward_figure(
            curves, Path(config.out_dir) / f"reward_{config.variant}.png", window=window
        )
        print(f"figure: {fig}")
        if deep:
            fig = save_omega_figure(curves, Path(config.out_dir) / f"omega_{config.variant}.png")
            print(f"figure: {fig}")
    for r in result.seed_results:
        greedy = "" if r.greedy_return is None else f" greedy_return={r.greedy_return}"
        print(
            f"seed {r.seed}: cumulative={r.final_cumulative:.3f} "
            f"episodes={r.episodes}{greedy}"
        )
    print(f"summary: {result.summary_path}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    n_list = [int(v) for v in args.n.split(",") if v]
    series = {"selection": SELECTION_SERIES, "train": TRAIN_SERIES, "all": ALL_SERIES}[args.series]
    result = bench_stochmax(n_list, repetitions=args.reps, series=series, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "bench.csv"
    write_bench_csv(csv_path, result)
    from .plots import save_loglog_figure

    fig = save_loglog_figure(result, out / "bench_loglog.png")
    for name, slope in sorted(result.slopes.items()):
        print(f"{name}: slope {slope:.3f}")
    print(f"table: {csv_path}")
    print(f"figure: {fig}")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    params = {}
    for key in ("n", "k", "trials", "runs", "seed", "steps", "gamma", "epsilon", "tol"):
        value = getattr(args, key)
        if value is not None:
            params[key] = value
    if args.n_states is not None:
        params["n_states"] = args.n_states
    if args.n_actions is not None:
        params["n_actions"] = args.n_actions
    report = run_analysis(args.which, **params)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report_path = out / f"report_{args.which}.json"
    report_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    status = "PASS" if report["passed"] else "FAIL"
    print(f"{status} {args.which}: {report_path}")
    if not report["passed"]:
        print(report.get("message", ""), file=sys.stderr)
        return EXIT_ANALYSIS
    return EXIT_OK


def _cmd_summarize(args) -> int:
    groups: dict[str, list] = {}
    for path in args.curves:
        label = Path(path).stem.replace("curve_", "").rsplit("_seed", 1)[0]
        groups.setdefault(label, []).append(read_curve(path))
    summaries = summarize(groups, window=args.window)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "summary.csv"
    write_summary_csv(csv_path, summaries)
    from .plots import save_reward_figure

    fig = save_reward_figure(groups, out / "reward_curves.png", window=args.window)
    for s in summaries:
        print(
            f"{s.label}: cumulative {s.final_cumulative_mean:.2f} +/- {s.final_cumulative_std:.2f} "
            f"({s.n_curves} curves)"
        )
    print(f"table: {csv_path}")
    print(f"figure: {fig}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run-tabular":
            return _cmd_run(args, deep=False)
        if args.command == "run-deep":
            return _cmd_run(args, deep=True)
        if args.command == "bench-stochmax":
            return _cmd_bench(args)
        if args.command == "analyze":
            return _cmd_analyze(args)
        if args.command == "summarize":
            return _cmd_summarize(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    raise AssertionError("unreachable")


if __name__ == "__main__":
    raise SystemExit(main())
