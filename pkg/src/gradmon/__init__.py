"""Gradient-monitored Adam variants for policy-gradient reinforcement
learning, with the two tasks they were developed on: a two-robot
manufacturing cell (n-step actor-critic) and pendulum swing-up (PPO)."""

from .a2c import A2cConfig, a2c_loss_and_grads, a2c_update, n_step_returns
from .buffers import RolloutBuffer
from .nn import (GradientSet, LayerSpec, Network, fd_gradient_array,
                 fd_gradient_oracle, init_parameters)
from .optim import (AdamOptimizer, GmConfig, GmOptimizer, adam_direction,
                    compute_mask, decision_matrix, episode_reward_mean,
                    layer_threshold)
from .policy import PolicyOutput, act
from .ppo import PpoConfig, gae_advantages, ppo_loss_and_grads, ppo_update
from .rng import Rng, derive_seed

__version__ = "0.1.0"

__all__ = [
    "A2cConfig", "a2c_loss_and_grads", "a2c_update", "n_step_returns",
    "RolloutBuffer",
    "GradientSet", "LayerSpec", "Network", "fd_gradient_array",
    "fd_gradient_oracle", "init_parameters",
    "AdamOptimizer", "GmConfig", "GmOptimizer", "adam_direction",
    "compute_mask", "decision_matrix", "episode_reward_mean", "layer_threshold",
    "PolicyOutput", "act",
    "PpoConfig", "gae_advantages", "ppo_loss_and_grads", "ppo_update",
    "Rng", "derive_seed",
    "__version__",
]
