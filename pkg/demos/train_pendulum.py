"""Train pendulum swing-up with PPO, with or without gradient monitoring.

The m_wgm variant runs without global gradient-norm clipping; the per-layer
soft masks take over the stabilizing role. Prints the rolling mean episode
reward as training progresses; swing-up territory is roughly -200.

Usage:
    python demos/train_pendulum.py --variant m_wgm --budget 150 --seed 1
"""

import argparse

import numpy as np

from gradmon.harness.config import default_config
from gradmon.harness.runner import train_pendulum_seed


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--variant", default="wogm",
                    choices=["wogm", "f_wgm", "u_wgm", "m_wgm", "am_wgm"])
    ap.add_argument("--budget", type=int, default=150,
                    help="number of rollout/update cycles")
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    cfg = default_config("pendulum", args.variant, seeds=[args.seed])
    cfg.budget = args.budget
    clip = cfg.ppo.max_grad_norm if args.variant == "wogm" else None
    print(f"variant={args.variant} seed={args.seed} budget={args.budget} "
          f"lr={cfg.lr} k_epochs={cfg.ppo.k_epochs} grad_clip={clip}")

    result = train_pendulum_seed(cfg, args.seed)
    rewards = np.array([row[3] for row in result.rows])
    actives = np.array([row[7] for row in result.rows])
    print("update   rolling reward   active %")
    for i in range(9, args.budget, 10):
        print(f"{i + 1:6d}   {rewards[i]:14.1f}   {actives[i]:7.1f}")
    best = rewards.max()
    print(f"best rolling reward: {best:.1f} "
          f"({'swing-up reached' if best >= -400 else 'still swinging'})")


if __name__ == "__main__":
    main()
