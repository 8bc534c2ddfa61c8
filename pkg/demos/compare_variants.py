"""Head-to-head run of optimizer variants through the experiment harness.

Trains each requested variant on a scaled-down robot cell through the same
`run_training` entry point the CLI uses, then prints the comparison table
the `compare` subcommand would produce. Artifacts (metrics.csv,
summary.json, checkpoints) land under --out.

Usage:
    python demos/compare_variants.py --budget 800 --seeds 1 2 3
"""

import argparse
import os

from gradmon.harness.config import default_config
from gradmon.harness.runner import compare, run_training


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--variants", nargs="+",
                    default=["wogm", "m_wgm", "am_wgm"])
    ap.add_argument("--budget", type=int, default=800)
    ap.add_argument("--seeds", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--out", default="runs/variant_comparison")
    args = ap.parse_args()

    dirs = []
    for variant in args.variants:
        cfg = default_config("robot_cell", variant, seeds=list(args.seeds))
        cfg.name = f"cell-{variant}"
        cfg.budget = args.budget
        cfg.env_options = {"targets": [5, 5], "max_steps": 1000}
        out_dir = os.path.join(args.out, variant)
        print(f"training {variant} (seeds {args.seeds}, "
              f"{args.budget} episodes each)...", flush=True)
        result = run_training(cfg, out_dir)
        print(f"  final-window reward: {result['summary']['formatted']}")
        dirs.append(out_dir)

    rows = compare(dirs[0], dirs[1:])
    print("\nrun              mean final reward     change vs baseline")
    for row in rows:
        print(f"{row['name']:<16} {row['mean']:17.1f}     "
              f"{row['pct_change']:+9.2f}%")


if __name__ == "__main__":
    main()
