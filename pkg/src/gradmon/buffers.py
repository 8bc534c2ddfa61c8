"""Rollout storage shared by the actor-critic and PPO updates."""

from __future__ import annotations

from typing import List, Union

import numpy as np


class RolloutBuffer:
    """Per-step transition lists plus a bootstrap value for truncation.

    All lists grow in lockstep through `add`. `terminals[t]` marks that the
    episode ended at step t; `bootstrap_value` is V(s_T) for a buffer cut
    mid-episode and is ignored when the final step is terminal.
    """

    def __init__(self):
        self.states: List[np.ndarray] = []
        self.actions: List[Union[int, np.ndarray]] = []
        self.rewards: List[float] = []
        self.values: List[float] = []
        self.log_probs: List[float] = []
        self.terminals: List[bool] = []
        self.bootstrap_value: float = 0.0

    def add(self, state, action, reward: float, value: float,
            log_prob: float, terminal: bool) -> None:
        self.states.append(np.asarray(state, dtype=np.float64))
        self.actions.append(action)
        self.rewards.append(float(reward))
        self.values.append(float(value))
        self.log_probs.append(float(log_prob))
        self.terminals.append(bool(terminal))

    def __len__(self) -> int:
        return len(self.states)

    def clear(self) -> None:
        self.__init__()

    def stacked_states(self) -> np.ndarray:
        return np.stack(self.states)

    def stacked_actions(self) -> np.ndarray:
        return np.asarray(self.actions)
