"""Seeded training runs, greedy evaluation, and run comparison.

`run_training` executes every seed of a config sequentially and writes four
artifacts into the output directory: `metrics.csv` (one row per episode for
the actor-critic task, per update for PPO), `summary.json` (final-window
reward statistics across seeds), `config.json` (the resolved config) and one
`checkpoint_seed<k>.json` per seed. Runs are deterministic: the same config
file produces byte-identical CSV output.

The metrics CSV schema is fixed:

    run,seed,step_index,reward,steps,outputs,abs_grad_sum,active_pct,lambda

For the robot cell, `reward` is the episode's total shared reward and
`outputs` the parts delivered; gradient columns average the episode's
updates over both agents. For the pendulum, `reward` is the mean return of
the last 20 finished episodes at that update.
"""

from __future__ import annotations

import json
import math
import os
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from ..a2c import a2c_update
from ..buffers import RolloutBuffer
from ..envs.pendulum import PendulumEnv, PendulumParams
from ..envs.robot_cell import OBS_SIZE, RobotCellEnv
from ..nn import Network, init_parameters
from ..optim import GmOptimizer
from ..policy import act
from ..ppo import ppo_update
from ..rng import Rng, derive_seed
from .checkpoint import load_checkpoint, save_checkpoint
from .config import RunConfig, save_config

CSV_HEADER = "run,seed,step_index,reward,steps,outputs,abs_grad_sum,active_pct,lambda"

ROBOT_AGENTS = 2


@dataclass
class SeedResult:
    seed: int
    rows: List[tuple] = field(default_factory=list)
    update_abs_grad_sums: List[float] = field(default_factory=list)
    episode_completed: List[bool] = field(default_factory=list)
    checkpoint: Optional[dict] = None
    failed: bool = False
    error: str = ""


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def final_window_mean(rewards: List[float]) -> float:
    """Mean reward over the final 10% (at least one) of the rows."""
    if not rewards:
        return float("nan")
    k = max(1, math.ceil(0.1 * len(rewards)))
    return float(np.mean(rewards[-k:]))


def _mean(values: List[float]) -> float:
    return float(np.mean(values)) if values else 0.0


# ---------------------------------------------------------------------------
# robot cell / n-step actor-critic


def _build_robot_agents(cfg: RunConfig, seed: int):
    nets, optimizers, rngs = [], [], []
    for i in range(ROBOT_AGENTS):
        net = cfg.net.build(OBS_SIZE)
        init_parameters(net, derive_seed(seed, f"init/agent{i}"))
        optimizers.append(GmOptimizer(net, cfg.gm, cfg.lr, eta_external=True))
        rngs.append(Rng(derive_seed(seed, f"policy/agent{i}")))
        nets.append(net)
    return nets, optimizers, rngs


def _robot_checkpoint(cfg: RunConfig, seed: int, episodes_done: int,
                      nets, optimizers, rngs) -> dict:
    return {
        "env": cfg.env,
        "algo": cfg.algo,
        "seed": seed,
        "episodes_done": episodes_done,
        "agents": [
            {
                "net": nets[i].state_dict(),
                "optimizer": optimizers[i].state_dict(),
                "policy_rng": rngs[i].state_dict(),
            }
            for i in range(ROBOT_AGENTS)
        ],
    }


def train_robot_seed(cfg: RunConfig, seed: int,
                     start: Optional[dict] = None) -> SeedResult:
    """Train the two-agent cell for cfg.budget episodes (resuming if given)."""
    opts = cfg.env_options
    env = RobotCellEnv(tuple(opts.get("targets", (20, 20))),
                       int(opts.get("max_steps", 1000)))
    nets, optimizers, rngs = _build_robot_agents(cfg, seed)
    first_episode = 0
    if start is not None:
        first_episode = int(start["episodes_done"])
        for i in range(ROBOT_AGENTS):
            nets[i].load_state_dict(start["agents"][i]["net"])
            optimizers[i].load_state_dict(start["agents"][i]["optimizer"])
            rngs[i].load_state_dict(start["agents"][i]["policy_rng"])

    result = SeedResult(seed=seed)
    n_step = cfg.a2c.n_step
    for episode in range(first_episode, cfg.budget):
        obs = env.reset()
        buffers = [RolloutBuffer() for _ in range(ROBOT_AGENTS)]
        episode_reward = 0.0
        steps = 0
        grad_sums: List[float] = []
        actives: List[float] = []
        done = False
        info = {}
        while not done:
            choices = [act(nets[i], obs, "categorical", rngs[i])
                       for i in range(ROBOT_AGENTS)]
            next_obs, reward, done, info = env.step(choices[0].action, choices[1].action)
            episode_reward += reward
            steps += 1
            for i in range(ROBOT_AGENTS):
                buffers[i].add(obs, choices[i].action, reward,
                               choices[i].value, choices[i].log_prob, done)
                optimizers[i].observe_rewards([reward])
                if len(buffers[i]) >= n_step or done:
                    bootstrap = 0.0 if done else float(
                        nets[i].forward(next_obs, "critic")[0, 0])
                    metrics = a2c_update(nets[i], optimizers[i], buffers[i],
                                         cfg.a2c, bootstrap)
                    grad_sums.append(metrics["abs_grad_sum"])
                    actives.append(metrics["active_pct"])
                    result.update_abs_grad_sums.append(metrics["abs_grad_sum"])
                    buffers[i].clear()
            obs = next_obs
        for opt in optimizers:
            opt.advance_eta()
        result.episode_completed.append(env.state.targets_met())
        result.rows.append((cfg.name, seed, episode, episode_reward, steps,
                            sum(info["outputs"]), _mean(grad_sums),
                            _mean(actives), optimizers[0].lam))

    result.checkpoint = _robot_checkpoint(cfg, seed, cfg.budget, nets,
                                          optimizers, rngs)
    return result


# ---------------------------------------------------------------------------
# pendulum / PPO


def _pendulum_env(cfg: RunConfig) -> PendulumEnv:
    fields = {k: v for k, v in cfg.env_options.items()
              if k in PendulumParams.__dataclass_fields__}
    return PendulumEnv(PendulumParams(**fields))


def train_pendulum_seed(cfg: RunConfig, seed: int,
                        start: Optional[dict] = None) -> SeedResult:
    env = _pendulum_env(cfg)
    net = cfg.net.build(3)
    init_parameters(net, derive_seed(seed, "init/agent0"))
    action_dim = net.output_dim("actor")
    log_std = np.zeros(action_dim)
    optimizer = GmOptimizer(net, cfg.gm, cfg.lr,
                            extra_params={"log_std": log_std}, eta_external=True)
    env_rng = Rng(derive_seed(seed, "env"))
    pol_rng = Rng(derive_seed(seed, "policy/agent0"))
    shuffle_rng = Rng(derive_seed(seed, "shuffle"))

    first_update = 0
    recent: deque = deque(maxlen=20)
    episode_reward = 0.0
    if start is not None:
        first_update = int(start["updates_done"])
        net.load_state_dict(start["net"])
        log_std[...] = np.asarray(start["log_std"], dtype=np.float64)
        optimizer.load_state_dict(start["optimizer"])
        env_rng.load_state_dict(start["env_rng"])
        pol_rng.load_state_dict(start["policy_rng"])
        shuffle_rng.load_state_dict(start["shuffle_rng"])
        env.theta = float(start["env_state"]["theta"])
        env.theta_dot = float(start["env_state"]["theta_dot"])
        env._steps = int(start["env_state"]["steps"])
        env._done = False
        recent.extend(float(r) for r in start["recent_rewards"])
        episode_reward = float(start["episode_reward"])
        obs = env.observation()
    else:
        obs = env.reset(env_rng)

    result = SeedResult(seed=seed)
    for update in range(first_update, cfg.budget):
        buf = RolloutBuffer()
        for _ in range(cfg.ppo.rollout_steps):
            out = act(net, obs, cfg.ppo.policy_kind, pol_rng, log_std)
            torque = float(out.action[0])
            next_obs, reward, done = env.step(torque)
            buf.add(obs, out.action, reward, out.value, out.log_prob, done)
            episode_reward += reward
            if done:
                recent.append(episode_reward)
                episode_reward = 0.0
                obs = env.reset(env_rng)
            else:
                obs = next_obs
        if buf.terminals[-1]:
            buf.bootstrap_value = 0.0
        else:
            buf.bootstrap_value = float(net.forward(obs, "critic")[0, 0])
        optimizer.observe_rewards(buf.rewards)
        metrics = ppo_update(net, log_std, optimizer, buf, cfg.ppo, shuffle_rng)
        optimizer.advance_eta()
        result.update_abs_grad_sums.append(metrics["abs_grad_sum"])
        reward_metric = _mean(list(recent)) if recent else 0.0
        result.rows.append((cfg.name, seed, update, reward_metric,
                            cfg.ppo.rollout_steps, 0, metrics["abs_grad_sum"],
                            metrics["active_pct"], optimizer.lam))

    result.checkpoint = {
        "env": cfg.env,
        "algo": cfg.algo,
        "seed": seed,
        "updates_done": cfg.budget,
        "net": net.state_dict(),
        "log_std": log_std.tolist(),
        "optimizer": optimizer.state_dict(),
        "env_rng": env_rng.state_dict(),
        "policy_rng": pol_rng.state_dict(),
        "shuffle_rng": shuffle_rng.state_dict(),
        "env_state": {"theta": env.theta, "theta_dot": env.theta_dot,
                      "steps": env._steps},
        "recent_rewards": list(recent),
        "episode_reward": episode_reward,
    }
    return result


# ---------------------------------------------------------------------------
# drivers


def _train_seed(cfg: RunConfig, seed: int) -> SeedResult:
    try:
        if cfg.env == "robot_cell":
            return train_robot_seed(cfg, seed)
        return train_pendulum_seed(cfg, seed)
    except FloatingPointError as exc:
        result = SeedResult(seed=seed, failed=True, error=str(exc))
        return result


def run_training(cfg: RunConfig, out_dir: str) -> dict:
    """Train every seed, write artifacts, return the summary plus raw results."""
    os.makedirs(out_dir, exist_ok=True)
    seed_results: Dict[int, SeedResult] = {}
    for seed in cfg.seeds:
        seed_results[seed] = _train_seed(cfg, seed)

    csv_path = os.path.join(out_dir, "metrics.csv")
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for seed in cfg.seeds:
            for row in seed_results[seed].rows:
                name, sd, idx, reward, steps, outputs, gsum, active, lam = row
                fh.write(",".join([name, str(sd), str(idx), _fmt(reward),
                                   str(steps), str(outputs), _fmt(gsum),
                                   _fmt(active), _fmt(lam)]) + "\n")

    per_seed_final = {}
    for seed in cfg.seeds:
        res = seed_results[seed]
        if not res.failed and res.rows:
            per_seed_final[str(seed)] = final_window_mean([r[3] for r in res.rows])
    values = list(per_seed_final.values())
    mean = float(np.mean(values)) if values else float("nan")
    std = float(np.std(values)) if values else float("nan")
    summary = {
        "name": cfg.name,
        "env": cfg.env,
        "algo": cfg.algo,
        "variant": cfg.gm.variant,
        "seeds": list(cfg.seeds),
        "per_seed_final": per_seed_final,
        "mean": mean,
        "std": std,
        "formatted": f"{mean:.0f}±{std:.0f}" if values else "n/a",
        "failed_seeds": [s.seed for s in seed_results.values() if s.failed],
    }
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8",
              newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    save_config(cfg, os.path.join(out_dir, "config.json"))
    for seed in cfg.seeds:
        res = seed_results[seed]
        if res.checkpoint is not None:
            save_checkpoint(os.path.join(out_dir, f"checkpoint_seed{seed}.json"),
                            res.checkpoint)
    return {"summary": summary, "out_dir": out_dir, "seed_results": seed_results}


def evaluate(cfg: RunConfig, checkpoint_path: str,
             episodes: Optional[int] = None) -> dict:
    """Greedy rollouts from a checkpoint; parameters are never modified."""
    payload = load_checkpoint(checkpoint_path)
    if payload["env"] != cfg.env:
        raise ValueError("checkpoint/config environment mismatch")
    n_episodes = episodes if episodes is not None else cfg.eval_episodes
    per_episode = []

    if cfg.env == "robot_cell":
        opts = cfg.env_options
        env = RobotCellEnv(tuple(opts.get("targets", (20, 20))),
                           int(opts.get("max_steps", 1000)))
        nets = []
        for i in range(ROBOT_AGENTS):
            net = cfg.net.build(OBS_SIZE)
            net.load_state_dict(payload["agents"][i]["net"])
            nets.append(net)
        for _ in range(n_episodes):
            obs = env.reset()
            total, steps, done = 0.0, 0, False
            info = {}
            while not done:
                a = [act(net, obs, "categorical", None, greedy=True).action
                     for net in nets]
                obs, reward, done, info = env.step(a[0], a[1])
                total += reward
                steps += 1
            per_episode.append({"reward": total, "steps": steps,
                                "outputs": sum(info["outputs"])})
    else:
        env = _pendulum_env(cfg)
        net = cfg.net.build(3)
        net.load_state_dict(payload["net"])
        log_std = np.asarray(payload["log_std"], dtype=np.float64)
        env_rng = Rng(derive_seed(int(payload["seed"]), "eval_env"))
        for _ in range(n_episodes):
            obs = env.reset(env_rng)
            total, steps, done = 0.0, 0, False
            while not done:
                out = act(net, obs, cfg.ppo.policy_kind, None, log_std, greedy=True)
                obs, reward, done = env.step(float(out.action[0]))
                total += reward
                steps += 1
            per_episode.append({"reward": total, "steps": steps, "outputs": 0})

    rewards = [e["reward"] for e in per_episode]
    return {
        "episodes": n_episodes,
        "mean_reward": float(np.mean(rewards)),
        "std_reward": float(np.std(rewards)),
        "mean_steps": float(np.mean([e["steps"] for e in per_episode])),
        "mean_outputs": float(np.mean([e["outputs"] for e in per_episode])),
        "per_episode": per_episode,
    }


def compare(baseline_dir: str, candidate_dirs: List[str]) -> List[dict]:
    """Percent change of final-window reward against a baseline run.

    Per seed: 100 * (candidate - baseline) / |baseline|; the aggregate is
    the mean over the seeds both runs share.
    """
    def _load(d):
        with open(os.path.join(d, "summary.json"), "r", encoding="utf-8") as fh:
            return json.load(fh)

    base = _load(baseline_dir)
    rows = [{"name": base["name"], "dir": baseline_dir, "mean": base["mean"],
             "pct_change": 0.0, "per_seed_pct": {}}]
    for cand_dir in candidate_dirs:
        cand = _load(cand_dir)
        if cand["env"] != base["env"]:
            raise ValueError(
                f"cannot compare {cand['env']!r} run against {base['env']!r} baseline")
        shared = sorted(set(base["per_seed_final"]) & set(cand["per_seed_final"]),
                        key=int)
        if not shared:
            raise ValueError(f"no shared seeds between baseline and {cand_dir!r}")
        per_seed = {}
        for s in shared:
            b = base["per_seed_final"][s]
            c = cand["per_seed_final"][s]
            per_seed[s] = 100.0 * (c - b) / max(abs(b), 1e-12)
        rows.append({
            "name": cand["name"],
            "dir": cand_dir,
            "mean": cand["mean"],
            "pct_change": float(np.mean(list(per_seed.values()))),
            "per_seed_pct": per_seed,
        })
    return rows
