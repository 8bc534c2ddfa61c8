"""Action selection for categorical and diagonal-Gaussian policies.

Both policy kinds read an "actor" and a "critic" head from the same network.
The Gaussian policy keeps a state-independent learned log standard deviation
that lives outside the network (it is a free parameter array owned by the
agent); `act` receives it explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .nn import Network
from .rng import Rng

_LOG_2PI = math.log(2.0 * math.pi)

POLICY_KINDS = ("categorical", "gaussian")


@dataclass
class PolicyOutput:
    action: Union[int, np.ndarray]
    log_prob: float
    entropy: float
    value: float


def categorical_log_probs(probs: np.ndarray, actions: np.ndarray) -> np.ndarray:
    """log pi(a|s) for a batch of sampled action indices."""
    picked = probs[np.arange(len(actions)), actions]
    return np.log(np.maximum(picked, 1e-12))


def categorical_entropy(probs: np.ndarray) -> np.ndarray:
    safe = np.maximum(probs, 1e-12)
    return -(safe * np.log(safe)).sum(axis=1)


def gaussian_log_probs(mean: np.ndarray, log_std: np.ndarray,
                       actions: np.ndarray) -> np.ndarray:
    """Diagonal-Gaussian log density of actions, summed over dimensions."""
    z = (actions - mean) / np.exp(log_std)
    return (-0.5 * z * z - log_std - 0.5 * _LOG_2PI).sum(axis=1)


def gaussian_entropy(log_std: np.ndarray) -> float:
    """Entropy of the diagonal Gaussian; 0.5*ln(2*pi*e) + log_std per dim."""
    return float((log_std + 0.5 * (_LOG_2PI + 1.0)).sum())


def act(net: Network, state, policy_kind: str, rng: Optional[Rng],
        log_std: Optional[np.ndarray] = None, greedy: bool = False) -> PolicyOutput:
    """Sample (or pick greedily) one action and report its statistics.

    Greedy mode takes the argmax probability (categorical) or the mean action
    (gaussian) and is what evaluation rollouts use; rng may be None then.
    """
    if policy_kind not in POLICY_KINDS:
        raise ValueError(f"unknown policy kind {policy_kind!r}")
    outs = net.forward_many(state, ["actor", "critic"])
    value = float(outs["critic"][0, 0])

    if policy_kind == "categorical":
        probs = outs["actor"][0]
        if greedy:
            action = int(np.argmax(probs))
        else:
            action = rng.categorical(probs)
        log_prob = float(np.log(max(probs[action], 1e-12)))
        entropy = float(categorical_entropy(outs["actor"])[0])
        return PolicyOutput(action, log_prob, entropy, value)

    if log_std is None:
        raise ValueError("gaussian policy needs log_std")
    mean = outs["actor"][0]
    if greedy:
        action = mean.copy()
    else:
        action = mean + np.exp(log_std) * rng.normal(size=mean.shape)
    log_prob = float(gaussian_log_probs(mean.reshape(1, -1), log_std,
                                        action.reshape(1, -1))[0])
    return PolicyOutput(action, log_prob, gaussian_entropy(log_std), value)
