"""n-step advantage actor-critic on a trunk-and-heads network.

The update consumes a rollout buffer of at most `n_step` transitions (the
buffer never spans an episode boundary in the training loops here, but the
return computation handles mid-buffer terminals anyway), regresses the
critic on bootstrapped n-step returns and follows the policy gradient with
raw advantages R - V.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .buffers import RolloutBuffer
from .nn import GradientSet, Network
from .optim import GmOptimizer
from .policy import categorical_entropy


@dataclass
class A2cConfig:
    gamma: float = 0.99
    n_step: int = 10
    entropy_coef: float = 0.003
    value_coef: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.n_step < 1:
            raise ValueError("n_step must be >= 1")


def n_step_returns(rewards, terminals, bootstrap_value: float, gamma: float) -> np.ndarray:
    """Discounted returns computed backward; terminals cut the bootstrap."""
    returns = np.zeros(len(rewards))
    acc = float(bootstrap_value)
    for t in range(len(rewards) - 1, -1, -1):
        if terminals[t]:
            acc = 0.0
        acc = rewards[t] + gamma * acc
        returns[t] = acc
    return returns


def a2c_loss_and_grads(net: Network, states: np.ndarray, actions: np.ndarray,
                       advantages: np.ndarray, returns: np.ndarray,
                       cfg: A2cConfig) -> Tuple[float, GradientSet]:
    """Mean policy-gradient + entropy + value loss and its gradients.

    loss = -mean(log pi(a|s) * A) - entropy_coef * mean(H)
           + value_coef * mean((V - R)^2)

    Advantages and returns are data here, not functions of the parameters;
    the gradient enters the actor head at the probability outputs and the
    critic head at the value outputs.
    """
    net.zero_grads()
    batch = len(actions)
    outs = net.forward_many(states, ["actor", "critic"], cache=True)
    probs = outs["actor"]
    values = outs["critic"][:, 0]

    safe = np.maximum(probs, 1e-12)
    picked = safe[np.arange(batch), actions]
    entropy = categorical_entropy(probs)
    pg_loss = -float(np.mean(np.log(picked) * advantages))
    ent_loss = -cfg.entropy_coef * float(np.mean(entropy))
    v_loss = cfg.value_coef * float(np.mean((values - returns) ** 2))
    loss = pg_loss + ent_loss + v_loss

    grad_probs = cfg.entropy_coef * (1.0 + np.log(safe)) / batch
    grad_probs[np.arange(batch), actions] -= advantages / (batch * picked)
    grad_values = (2.0 * cfg.value_coef / batch) * (values - returns)

    net.backward(grad_probs, "actor")
    net.backward(grad_values.reshape(-1, 1), "critic")
    return loss, net.grads


def a2c_update(net: Network, optimizer: GmOptimizer, buf: RolloutBuffer,
               cfg: A2cConfig, bootstrap_value: float) -> Dict[str, float]:
    """One optimizer step from a filled buffer; returns the step metrics."""
    states = buf.stacked_states()
    actions = buf.stacked_actions()
    returns = n_step_returns(buf.rewards, buf.terminals, bootstrap_value, cfg.gamma)
    advantages = returns - np.asarray(buf.values)
    loss, grads = a2c_loss_and_grads(net, states, actions, advantages, returns, cfg)
    metrics = optimizer.step(grads)
    metrics["loss"] = loss
    return metrics
