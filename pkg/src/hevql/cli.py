"""Command-line interface.

Exit codes: 0 success, 2 configuration problems, 3 I/O problems,
4 validation problems (malformed cycle/table files, grid mismatches).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from typing import List, Optional

from .config import ConfigError, ExperimentConfig, load_config
from .cycle import CycleFormatError
from .harness import (
    ValidationError,
    cmd_compare,
    cmd_cycle_validate,
    cmd_ecms_eval,
    cmd_eval,
    cmd_train,
)
from .qlearning import QTableFormatError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_VALIDATION = 4

INIT_CHOICES = ("cold", "heuristic", "ecms")


def _parse_seeds(text: str) -> List[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok != ""]
    except ValueError:
        raise ConfigError(f"--seeds must be a comma-separated integer list, got {text!r}")


def _apply_overrides(cfg: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    run = cfg.run
    hyper = cfg.hyper
    if getattr(args, "init", None):
        init = args.init
        first = init.split(",")[0]
        run = replace(run, initializer=first)
    if getattr(args, "seeds", None):
        seeds = _parse_seeds(args.seeds)
        if not seeds:
            raise ConfigError("--seeds must name at least one seed")
        run = replace(run, seeds=tuple(seeds))
    if getattr(args, "iterations", None) is not None:
        if args.iterations < 1:
            raise ConfigError("--iterations must be >= 1")
        hyper = replace(hyper, iterations=args.iterations)
    return replace(cfg, run=run, hyper=hyper)


def _cycle_path(cfg: ExperimentConfig, args: argparse.Namespace) -> str:
    return args.cycle if args.cycle else cfg.cycles.udds


def _init_list(args: argparse.Namespace) -> List[str]:
    if not getattr(args, "init", None):
        return list(INIT_CHOICES)
    names = [tok for tok in args.init.split(",") if tok]
    for name in names:
        if name not in INIT_CHOICES:
            raise ConfigError(f"--init must use values from {INIT_CHOICES}, got {name!r}")
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hevql",
        description="Hybrid-vehicle energy management: Q-learning training and evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, cycle=True, out=True):
        p.add_argument("--config", default=None, help="YAML config; defaults apply when omitted")
        if cycle:
            p.add_argument("--cycle", default=None, help="cycle CSV; default from config")
        if out:
            p.add_argument("--out", required=True, help="output directory")

    p_train = sub.add_parser("train", help="train one initializer across seeds")
    common(p_train)
    p_train.add_argument("--init", default=None, help="cold | heuristic | ecms")
    p_train.add_argument("--iterations", type=int, default=None)
    p_train.add_argument("--seeds", default=None, help="comma-separated seed list")

    p_eval = sub.add_parser("eval", help="greedy evaluation of a saved Q-table")
    common(p_eval)
    p_eval.add_argument("--qtable", required=True, help="Q-table file to evaluate")

    p_ecms = sub.add_parser("ecms-eval", help="closed-loop ECMS evaluation")
    common(p_ecms)

    p_cmp = sub.add_parser("compare", help="train and compare initializers")
    common(p_cmp)
    p_cmp.add_argument("--init", default=None, help="comma list, default cold,heuristic,ecms")
    p_cmp.add_argument("--iterations", type=int, default=None)
    p_cmp.add_argument("--seeds", default=None, help="comma-separated seed list")

    p_val = sub.add_parser("cycle-validate", help="check a cycle file and print stats")
    p_val.add_argument("--cycle", required=True)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "cycle-validate":
            stats = cmd_cycle_validate(args.cycle)
            for key, value in stats.items():
                print(f"{key}={value}")
            return EXIT_OK

        cfg = load_config(args.config)
        cfg = _apply_overrides(cfg, args)
        cycle_path = _cycle_path(cfg, args)

        if args.command == "train":
            init = args.init
            if init is not None and init not in INIT_CHOICES:
                raise ConfigError(f"--init must be one of {INIT_CHOICES}, got {init!r}")
            runs = cmd_train(cfg, cycle_path, args.out, initializer=init)
            last = runs[0].records[-1]
            print(
                f"trained {runs[0].initializer} seeds={[r.seed for r in runs]} "
                f"iterations={last.iteration}"
            )
        elif args.command == "eval":
            summary = cmd_eval(cfg, args.qtable, cycle_path, args.out)
            print(f"mpg={summary.mpg} final_soc={summary.final_soc}")
        elif args.command == "ecms-eval":
            summary = cmd_ecms_eval(cfg, cycle_path, args.out)
            print(f"mpg={summary.mpg} final_soc={summary.final_soc}")
        elif args.command == "compare":
            rows = cmd_compare(cfg, cycle_path, args.out, initializers=_init_list(args))
            for row in rows:
                print(
                    f"{row.initializer}: iteration1_mpg={row.iteration1_mpg} "
                    f"final_mpg_mean={row.final_mpg_mean} "
                    f"iters_to_threshold={row.iterations_to_threshold_mean}"
                )
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CycleFormatError, QTableFormatError, ValidationError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
