"""Train the two-robot cell with any optimizer variant and watch it learn.

Scaled down from the full benchmark (5+5 work-pieces instead of 20+20) so a
run finishes in well under a minute. Prints a completion-rate block summary
every 200 episodes.

Usage:
    python demos/train_robot_cell.py --variant am_wgm --budget 1500 --seed 1
"""

import argparse

import numpy as np

from gradmon.harness.config import default_config
from gradmon.harness.runner import train_robot_seed


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--variant", default="am_wgm",
                    choices=["wogm", "f_wgm", "u_wgm", "m_wgm", "am_wgm"])
    ap.add_argument("--budget", type=int, default=1500)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--targets", type=int, nargs=2, default=[5, 5])
    args = ap.parse_args()

    cfg = default_config("robot_cell", args.variant, seeds=[args.seed])
    cfg.budget = args.budget
    cfg.env_options = {"targets": list(args.targets), "max_steps": 1000}

    print(f"variant={args.variant} seed={args.seed} budget={args.budget} "
          f"targets={tuple(args.targets)} lr={cfg.lr}")
    result = train_robot_seed(cfg, args.seed)

    completed = np.array(result.episode_completed, dtype=float)
    rewards = np.array([row[3] for row in result.rows])
    actives = np.array([row[7] for row in result.rows])
    print("episodes   completion   mean reward   active %")
    for lo in range(0, args.budget, 200):
        hi = min(lo + 200, args.budget)
        print(f"{lo:5d}-{hi:<5d}   {completed[lo:hi].mean():9.2%}   "
              f"{rewards[lo:hi].mean():11.1f}   {actives[lo:hi].mean():7.1f}")
    print(f"final lam: {result.rows[-1][8]:.3f}")


if __name__ == "__main__":
    main()
