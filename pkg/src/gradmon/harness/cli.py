"""Command-line entry points: train, eval, compare.

    gradmon train --config cfg.json [--seed N] [--override key=value ...]
    gradmon eval --config cfg.json --checkpoint ckpt.json [--episodes N]
    gradmon compare --baseline DIR DIR [DIR ...]
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .config import load_config
from .runner import compare, evaluate, run_training


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gradmon")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run seeded training from a config file")
    p_train.add_argument("--config", required=True)
    p_train.add_argument("--seed", type=int, default=None,
                         help="train this single seed instead of the config's list")
    p_train.add_argument("--override", action="append", default=[],
                         metavar="KEY=VALUE", help="dotted config override")
    p_train.add_argument("--out", default=None,
                         help="output directory (default: runs/<config name>)")

    p_eval = sub.add_parser("eval", help="greedy evaluation of a checkpoint")
    p_eval.add_argument("--config", required=True)
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--episodes", type=int, default=None)
    p_eval.add_argument("--override", action="append", default=[],
                        metavar="KEY=VALUE")

    p_cmp = sub.add_parser("compare", help="percent change of runs vs a baseline")
    p_cmp.add_argument("--baseline", required=True)
    p_cmp.add_argument("candidates", nargs="+")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "train":
        cfg = load_config(args.config, overrides=args.override, seed=args.seed)
        out_dir = args.out or f"runs/{cfg.name}"
        result = run_training(cfg, out_dir)
        summary = result["summary"]
        print(f"{summary['name']}: final-window reward {summary['formatted']} "
              f"over seeds {summary['seeds']}")
        if summary["failed_seeds"]:
            print(f"failed seeds: {summary['failed_seeds']}", file=sys.stderr)
        print(f"artifacts written to {out_dir}")
        return 0

    if args.command == "eval":
        cfg = load_config(args.config, overrides=args.override)
        report = evaluate(cfg, args.checkpoint, episodes=args.episodes)
        print(json.dumps({k: v for k, v in report.items() if k != "per_episode"},
                         indent=2, sort_keys=True))
        return 0

    rows = compare(args.baseline, args.candidates)
    width = max(len(r["name"]) for r in rows)
    for row in rows:
        print(f"{row['name']:<{width}}  mean {row['mean']:>12.2f}  "
              f"change {row['pct_change']:>+8.2f}%")
    return 0


if __name__ == "__main__":
    sys.exit(main())
