"""Clipped-surrogate PPO with generalized advantage estimation.

One call to `ppo_update` consumes a full rollout buffer: advantages are
normalized once over the buffer, then `k_epochs` passes of shuffled
minibatches step the optimizer. Gradient-norm clipping is applied only under
the unmonitored baseline variant; the monitored variants run unclipped, the
masking itself bounding the update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .buffers import RolloutBuffer
from .nn import GradientSet, Network
from .optim import GmOptimizer
from .policy import (categorical_entropy, categorical_log_probs,
                     gaussian_entropy, gaussian_log_probs)
from .rng import Rng


@dataclass
class PpoConfig:
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_eps: float = 0.2
    k_epochs: int = 4
    minibatch_size: int = 64
    rollout_steps: int = 2048
    entropy_coef: float = 0.0
    value_coef: float = 0.5
    normalize_advantages: bool = True
    max_grad_norm: Optional[float] = 0.5
    policy_kind: str = "gaussian"

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if not 0.0 <= self.gae_lambda <= 1.0:
            raise ValueError("gae_lambda must lie in [0, 1]")
        if self.clip_eps <= 0.0:
            raise ValueError("clip_eps must be positive")
        if self.k_epochs < 1 or self.minibatch_size < 1 or self.rollout_steps < 1:
            raise ValueError("epoch, minibatch and rollout sizes must be >= 1")


def gae_advantages(rewards, values, terminals, bootstrap_value: float,
                   gamma: float, lam: float) -> Tuple[np.ndarray, np.ndarray]:
    """GAE(lambda) advantages and value targets for one buffer.

    delta_t = r_t + gamma * V(s_{t+1}) * (1 - terminal_t) - V(s_t)
    A_t = delta_t + gamma * lam * (1 - terminal_t) * A_{t+1}

    Value targets are A + V, the lambda-weighted return estimates.
    """
    n = len(rewards)
    adv = np.zeros(n)
    next_value = float(bootstrap_value)
    acc = 0.0
    for t in range(n - 1, -1, -1):
        live = 0.0 if terminals[t] else 1.0
        delta = rewards[t] + gamma * next_value * live - values[t]
        acc = delta + gamma * lam * live * acc
        adv[t] = acc
        next_value = values[t]
    targets = adv + np.asarray(values)
    return adv, targets


def ppo_loss_and_grads(net: Network, log_std: Optional[np.ndarray],
                       states: np.ndarray, actions: np.ndarray,
                       advantages: np.ndarray, value_targets: np.ndarray,
                       old_log_probs: np.ndarray, cfg: PpoConfig
                       ) -> Tuple[float, GradientSet, Optional[np.ndarray], Dict[str, float]]:
    """Clipped-surrogate loss, its gradients, and ratio diagnostics.

    loss = -mean(min(r * A, clip(r, 1 - eps, 1 + eps) * A))
           + value_coef * mean((V - target)^2) - entropy_coef * mean(H)
    with r = exp(log pi_new - log pi_old). The gradient flows through the
    ratio only where the unclipped branch attains the min.
    """
    net.zero_grads()
    batch = len(actions)
    outs = net.forward_many(states, ["actor", "critic"], cache=True)
    values = outs["critic"][:, 0]

    if cfg.policy_kind == "categorical":
        probs = outs["actor"]
        safe = np.maximum(probs, 1e-12)
        new_log_probs = categorical_log_probs(probs, actions)
        entropy = categorical_entropy(probs)
        mean_entropy = float(np.mean(entropy))
    elif cfg.policy_kind == "gaussian":
        mean_out = outs["actor"]
        new_log_probs = gaussian_log_probs(mean_out, log_std, actions)
        mean_entropy = gaussian_entropy(log_std)
    else:
        raise ValueError(f"unknown policy kind {cfg.policy_kind!r}")

    ratio = np.exp(new_log_probs - old_log_probs)
    clipped = np.clip(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps)
    surr_raw = ratio * advantages
    surr_clip = clipped * advantages
    pg_loss = -float(np.mean(np.minimum(surr_raw, surr_clip)))
    v_loss = cfg.value_coef * float(np.mean((values - value_targets) ** 2))
    loss = pg_loss + v_loss - cfg.entropy_coef * mean_entropy

    # d/d(log pi_new): active only where the raw branch attains the min
    unclipped = surr_raw <= surr_clip
    grad_log_probs = np.where(unclipped, -advantages * ratio, 0.0) / batch
    grad_values = (2.0 * cfg.value_coef / batch) * (values - value_targets)

    log_std_grad = None
    if cfg.policy_kind == "categorical":
        grad_probs = cfg.entropy_coef * (1.0 + np.log(safe)) / batch
        picked = safe[np.arange(batch), actions]
        grad_probs[np.arange(batch), actions] += grad_log_probs / picked
        net.backward(grad_probs, "actor")
    else:
        std = np.exp(log_std)
        z = (actions - mean_out) / std
        grad_mean = grad_log_probs.reshape(-1, 1) * z / std
        log_std_grad = (grad_log_probs.reshape(-1, 1) * (z * z - 1.0)).sum(axis=0)
        log_std_grad = log_std_grad - cfg.entropy_coef
        net.backward(grad_mean, "actor")

    net.backward(grad_values.reshape(-1, 1), "critic")
    info = {
        "clip_frac": float(np.mean(np.abs(ratio - 1.0) > cfg.clip_eps)),
        "mean_ratio": float(np.mean(ratio)),
    }
    return loss, net.grads, log_std_grad, info


def clip_gradients(grads: GradientSet, extra: Optional[Dict[str, np.ndarray]],
                   max_norm: float) -> float:
    """Scale gradients in place to a global L2 norm cap; returns the norm."""
    total = 0.0
    arrays = list(grads.weights.values()) + list(grads.biases.values())
    if extra:
        arrays += list(extra.values())
    for g in arrays:
        total += float((g * g).sum())
    norm = math.sqrt(total)
    if norm > max_norm:
        scale = max_norm / norm
        for g in arrays:
            g *= scale
    return norm


def ppo_update(net: Network, log_std: Optional[np.ndarray],
               optimizer: GmOptimizer, buf: RolloutBuffer, cfg: PpoConfig,
               shuffle_rng: Rng) -> Dict[str, float]:
    """Run k_epochs of shuffled minibatches over one rollout buffer."""
    states = buf.stacked_states()
    actions = buf.stacked_actions()
    old_log_probs = np.asarray(buf.log_probs)
    advantages, targets = gae_advantages(
        buf.rewards, buf.values, buf.terminals, buf.bootstrap_value,
        cfg.gamma, cfg.gae_lambda)
    if cfg.normalize_advantages:
        advantages = (advantages - advantages.mean()) / max(advantages.std(), 1e-8)

    n = len(buf)
    clip_when = cfg.max_grad_norm is not None and optimizer.cfg.variant == "wogm"
    losses, clip_fracs, grad_sums, actives = [], [], [], []
    for _ in range(cfg.k_epochs):
        order = shuffle_rng.permutation(n)
        for start in range(0, n, cfg.minibatch_size):
            idx = order[start:start + cfg.minibatch_size]
            loss, grads, ls_grad, info = ppo_loss_and_grads(
                net, log_std, states[idx], actions[idx], advantages[idx],
                targets[idx], old_log_probs[idx], cfg)
            if not math.isfinite(loss):
                raise FloatingPointError("non-finite loss in update")
            extra = None if ls_grad is None else {"log_std": ls_grad}
            if clip_when:
                clip_gradients(grads, extra, cfg.max_grad_norm)
            metrics = optimizer.step(grads, extra)
            losses.append(loss)
            clip_fracs.append(info["clip_frac"])
            grad_sums.append(metrics["abs_grad_sum"])
            actives.append(metrics["active_pct"])

    return {
        "loss": float(np.mean(losses)),
        "clip_frac": float(np.mean(clip_fracs)),
        "abs_grad_sum": float(np.mean(grad_sums)),
        "active_pct": float(np.mean(actives)),
        "lam": optimizer.lam,
        "n_optimizer_steps": len(losses),
    }
