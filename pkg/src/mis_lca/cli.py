"""``mis-lca`` command line entry point.

Exit status: 0 when every verdict passes, 1 when any fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .graph import GraphError
from .harness import MODES, ConfigError, ExperimentConfig, build_graph, emit_report, run_experiment
from .reference import run
from .tape import ParamError, Params


def _seeds(text: str) -> tuple[int, ...]:
    try:
        seeds = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None
    if not seeds or any(not 0 <= s < 2**64 for s in seeds):
        raise argparse.ArgumentTypeError("seeds must be unsigned 64-bit integers")
    return seeds


def _values(text: str) -> tuple:
    out = []
    for s in text.split(","):
        s = s.strip()
        if not s:
            continue
        try:
            out.append(int(s))
        except ValueError:
            out.append(float(s))
    return tuple(out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mis-lca", description="Local computation of a maximal independent set.")
    p.add_argument("--mode", required=True, choices=MODES)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--gen", help="generator spec, e.g. gnp:n=1000,dmax=16")
    src.add_argument("--graph", help="edge-list file")
    p.add_argument("--seed", type=_seeds, default=(0,), help="seed or comma-separated seeds")
    p.add_argument("--ct", type=int, default=8, help="round multiplier C_T")
    p.add_argument("--delta", type=float, default=0.005)
    p.add_argument("--k-override", type=int, default=None)
    q = p.add_mutually_exclusive_group()
    q.add_argument("--question", type=int, help="ask about a single vertex")
    q.add_argument("--all", action="store_true", help="ask about every vertex")
    q.add_argument("--sample", type=int, help="ask about a fixed-seed sample of k vertices")
    p.add_argument("--cap", type=int, default=None, help="residual component size cap")
    p.add_argument("--sweep-param", default=None)
    p.add_argument("--sweep-values", type=_values, default=())
    p.add_argument("--ball-budget", type=int, default=2_000_000)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--trace", action="store_true", help="also write per-(v,t) trace CSVs (global mode)")
    p.add_argument("--timing", action="store_true", help="record wall-clock seconds (breaks byte-identity)")
    return p


def _config(args) -> ExperimentConfig:
    if args.question is not None:
        questions = f"vertex:{args.question}"
    elif args.sample is not None:
        questions = f"sample:{args.sample}"
    elif args.all:
        questions = "all"
    else:
        questions = "auto"
    return ExperimentConfig(
        mode=args.mode, gen=args.gen, graph_path=args.graph, seeds=args.seed, ct=args.ct,
        delta=args.delta, k_override=args.k_override, questions=questions, cap=args.cap,
        trace=args.trace, sweep_param=args.sweep_param, sweep_values=args.sweep_values,
        ball_budget=args.ball_budget, timing=args.timing,
    )


def _write_traces(cfg: ExperimentConfig, out: Path):
    for seed in cfg.seeds:
        g = build_graph(cfg, seed, {})
        params = Params.build(g.max_degree, ct=cfg.ct, delta=cfg.delta, seed=seed, k_override=cfg.k_override)
        outcome = run(g, params)
        out.with_name(f"{out.name}.seed{seed}.trace.csv").write_text(outcome.trace_csv())
        out.with_name(f"{out.name}.seed{seed}.outcome.json").write_text(outcome.to_json() + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        cfg = _config(args)
        report = run_experiment(cfg)
        out = Path(args.out)
        emit_report(report, out, args.format)
        if cfg.trace and cfg.mode == "global":
            _write_traces(cfg, out)
    except (ConfigError, GraphError, ParamError, ValueError, FileNotFoundError) as exc:
        print(f"mis-lca: error: {exc}", file=sys.stderr)
        return 2
    for name, v in report.verdicts.items():
        line = f"{name}: {v['verdict']}"
        if v["reason"]:
            line += f" ({v['reason']})"
        print(line)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
