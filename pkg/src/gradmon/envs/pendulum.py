"""Torque-limited pendulum swing-up with a fixed horizon.

State is the pole angle (kept wrapped to (-pi, pi], zero upright) and its
angular velocity; the observation is [cos(theta), sin(theta), theta_dot].
Dynamics integrate with a semi-implicit Euler step; the per-step reward is
-(theta^2 + 0.1 * theta_dot^2 + 0.001 * u^2), so hanging at rest costs
-pi^2 per step and balancing upright with no torque costs nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..rng import Rng


def wrap_angle(theta: float) -> float:
    """Wrap to (-pi, pi]."""
    w = (theta + math.pi) % (2.0 * math.pi) - math.pi
    if w == -math.pi:
        w = math.pi
    return w


@dataclass
class PendulumParams:
    mass: float = 1.0
    length: float = 1.0
    gravity: float = 10.0
    dt: float = 0.05
    torque_limit: float = 2.0
    max_speed: float = 8.0
    horizon: int = 200


class PendulumEnv:
    def __init__(self, params: PendulumParams | None = None):
        self.params = params or PendulumParams()
        self.theta = math.pi
        self.theta_dot = 0.0
        self._steps = 0
        self._done = True

    def reset(self, rng: Rng) -> np.ndarray:
        """Start from a random angle and a small random velocity."""
        self.theta = wrap_angle(rng.uniform(-math.pi, math.pi))
        self.theta_dot = rng.uniform(-1.0, 1.0)
        self._steps = 0
        self._done = False
        return self.observation()

    def observation(self) -> np.ndarray:
        return np.array([math.cos(self.theta), math.sin(self.theta), self.theta_dot])

    def step(self, torque: float):
        """Apply one torque; returns (obs, reward, done)."""
        if self._done:
            raise RuntimeError("episode finished; call reset()")
        p = self.params
        u = min(max(float(torque), -p.torque_limit), p.torque_limit)
        reward = -(self.theta ** 2 + 0.1 * self.theta_dot ** 2 + 0.001 * u ** 2)

        accel = (3.0 * p.gravity / (2.0 * p.length) * math.sin(self.theta)
                 + 3.0 / (p.mass * p.length ** 2) * u)
        self.theta_dot = self.theta_dot + accel * p.dt
        self.theta_dot = min(max(self.theta_dot, -p.max_speed), p.max_speed)
        self.theta = wrap_angle(self.theta + self.theta_dot * p.dt)

        self._steps += 1
        done = self._steps >= p.horizon
        self._done = done
        return self.observation(), reward, done
