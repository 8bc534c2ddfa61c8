"""Guided tour of the two-robot manufacturing cell.

Walks a scripted pair of robots through a clean production run, then
deliberately wrecks the cell to show a locked state, and finishes with a
batch of random-action episodes to show how often random play deadlocks.
"""

import numpy as np

from gradmon.envs.robot_cell import (ACTION_NAMES, RobotCellEnv, detect_locked)
from gradmon.rng import Rng


def banner(text):
    print(f"\n=== {text} ===")


def describe(env):
    st = env.state
    names = {0: ".", 1: "wp1", 2: "wp2"}
    stations = " ".join(f"S{i+1}={names[s]}" for i, s in enumerate(st.stations))
    print(f"  {stations}  input={st.input_remaining} "
          f"output={st.output_done} steps={st.step_count}")


def scripted(env, moves):
    total = 0.0
    for a1, a2 in moves:
        _, reward, done, info = env.step(a1, a2)
        total += reward
        tags = [k for k, v in info["events"].items() if v]
        print(f"  r1={ACTION_NAMES[a1]:<13} r2={ACTION_NAMES[a2]:<13} "
              f"reward={reward:+7.1f} {' '.join(tags)}")
        describe(env)
        if done:
            break
    print(f"  episode return: {total:+.1f}")
    return total


def main():
    banner("a full production run (1 wp1 + 1 wp2)")
    env = RobotCellEnv(targets=(1, 1), max_steps=50)
    env.reset()
    describe(env)
    scripted(env, [
        (0, 5),   # wp1 into S1, wp2 into S3
        (6, 9),   # advance wp1 to S2
        (8, 7),   # deliver wp1, advance wp2 to S2
        (8, 9),   # deliver wp2: both targets met, +500
    ])
    print("  the +19 step is -1 base, +50 delivery, -30 balance penalty:")
    print("  wp1 hit 100% of its target while wp2 was still below 75%")

    banner("wrecking the cell on purpose")
    print("a wp1 fetched into S3 can never advance; fill the rest and deliver")
    env = RobotCellEnv(targets=(1, 2), max_steps=50)
    env.reset()
    describe(env)
    scripted(env, [
        (2, 9),   # wp1 into S3: permanently stuck
        (3, 4),   # wp2 into S1 (stuck too) and S2
        (8, 9),   # deliver the S2 part; cell is now locked
    ])
    print("  after the delivery no fetch/advance/deliver has a satisfiable")
    print("  precondition, so the cell is locked and the episode ends at -100")

    banner("random play statistics (targets 2+2, 500 episodes)")
    rng = Rng(11)
    endings = {"completed": 0, "locked": 0, "timeout": 0}
    returns = []
    env = RobotCellEnv(targets=(2, 2), max_steps=60)
    for _ in range(500):
        env.reset()
        total, done = 0.0, False
        while not done:
            _, reward, done, info = env.step(rng.integer(10), rng.integer(10))
            total += reward
        returns.append(total)
        for key in endings:
            if info["events"][key]:
                endings[key] += 1
    print(f"  endings: {endings}")
    print(f"  mean return: {np.mean(returns):+.1f}")
    print("  random play locks the cell most of the time; the learner's job")
    print("  is to find the narrow corridor of schedules that never do")


if __name__ == "__main__":
    main()
