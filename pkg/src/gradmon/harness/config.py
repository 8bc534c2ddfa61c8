"""Run configuration: JSON files, per-task defaults, dotted-key overrides.

A config fully determines a run given its seed list. `default_config` bakes
in the hyperparameters the two bundled tasks were tuned with; anything can
be overridden from a JSON file or `key.path=value` strings.
"""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

from ..a2c import A2cConfig
from ..nn import LayerSpec, Network
from ..optim import GmConfig
from ..ppo import PpoConfig

ENVS = ("robot_cell", "pendulum")
ALGOS = ("a2c", "ppo")


@dataclass
class NetSpec:
    """Layer sizes by name; input size is supplied by the environment."""

    trunk: List[Tuple[int, str]]
    heads: Dict[str, List[Tuple[int, str]]]

    def build(self, input_dim: int) -> Network:
        trunk_specs = []
        prev = input_dim
        for units, activation in self.trunk:
            trunk_specs.append(LayerSpec(prev, int(units), activation))
            prev = int(units)
        head_specs = {}
        for name, layers in self.heads.items():
            specs = []
            h_prev = prev
            for units, activation in layers:
                specs.append(LayerSpec(h_prev, int(units), activation))
                h_prev = int(units)
            head_specs[name] = specs
        return Network(trunk_specs, head_specs)


@dataclass
class RunConfig:
    name: str
    env: str
    algo: str
    seeds: List[int]
    budget: int                    # episodes for a2c, updates for ppo
    lr: float
    gm: GmConfig
    net: NetSpec
    a2c: Optional[A2cConfig] = None
    ppo: Optional[PpoConfig] = None
    env_options: dict = field(default_factory=dict)
    eval_episodes: int = 4000

    def __post_init__(self):
        if self.env not in ENVS:
            raise ValueError(f"unknown env {self.env!r}")
        if self.algo not in ALGOS:
            raise ValueError(f"unknown algo {self.algo!r}")
        if self.algo == "a2c" and self.a2c is None:
            raise ValueError("a2c config missing")
        if self.algo == "ppo" and self.ppo is None:
            raise ValueError("ppo config missing")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if not self.seeds:
            raise ValueError("at least one seed is required")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = copy.deepcopy(data)
        data["gm"] = GmConfig(**data["gm"])
        net = data["net"]
        data["net"] = NetSpec(
            trunk=[(int(u), a) for u, a in net["trunk"]],
            heads={k: [(int(u), a) for u, a in v] for k, v in net["heads"].items()},
        )
        if data.get("a2c"):
            data["a2c"] = A2cConfig(**data["a2c"])
        if data.get("ppo"):
            data["ppo"] = PpoConfig(**data["ppo"])
        data["seeds"] = [int(s) for s in data["seeds"]]
        return cls(**data)


def default_config(env: str, variant: str = "wogm",
                   seeds: Optional[List[int]] = None) -> RunConfig:
    """Tuned defaults for each bundled task.

    robot_cell: two n-step actor-critic agents on 29-input networks with a
    2x10 sigmoid trunk and 2-layer ReLU heads; lr 1e-3 for the unmonitored
    baseline and 2e-3 for monitored variants.

    pendulum: PPO on a shared tanh trunk (64 units baseline, 96 monitored);
    lr 2.5e-4 / 3e-4, 4 / 5 epochs per update.
    """
    seeds = list(seeds) if seeds else [1, 2, 3, 4, 5]
    monitored = variant != "wogm"
    if env == "robot_cell":
        return RunConfig(
            name=f"robot_cell-{variant}",
            env="robot_cell",
            algo="a2c",
            seeds=seeds,
            budget=5000,
            lr=2e-3 if monitored else 1e-3,
            gm=GmConfig(variant=variant, lam=0.5, zeta=0.999, eta_start=1500,
                        eta_repeat=1000, alpha_lam=0.001, momentum_init=1.0),
            net=NetSpec(
                trunk=[(10, "sigmoid"), (10, "sigmoid")],
                heads={"actor": [(10, "relu"), (10, "softmax")],
                       "critic": [(10, "relu"), (1, "linear")]},
            ),
            a2c=A2cConfig(gamma=0.99, n_step=10, entropy_coef=0.003, value_coef=0.5),
            env_options={"targets": [20, 20], "max_steps": 1000},
            eval_episodes=4000,
        )
    if env == "pendulum":
        hidden = 96 if monitored else 64
        return RunConfig(
            name=f"pendulum-{variant}",
            env="pendulum",
            algo="ppo",
            seeds=seeds,
            budget=300,
            lr=3e-4 if monitored else 2.5e-4,
            gm=GmConfig(variant=variant, lam=0.5, zeta=0.99, eta_start=150,
                        eta_repeat=50, alpha_lam=0.05, momentum_init=1.0),
            net=NetSpec(
                trunk=[(hidden, "tanh"), (hidden, "tanh")],
                heads={"actor": [(1, "linear")], "critic": [(1, "linear")]},
            ),
            ppo=PpoConfig(gamma=0.9, gae_lambda=0.95, clip_eps=0.2,
                          k_epochs=5 if monitored else 4, minibatch_size=64,
                          rollout_steps=2048, entropy_coef=0.0, value_coef=0.5,
                          normalize_advantages=True, max_grad_norm=0.5,
                          policy_kind="gaussian"),
            env_options={},
            eval_episodes=100,
        )
    raise ValueError(f"unknown env {env!r}")


def apply_overrides(data: dict, overrides: List[str]) -> dict:
    """Apply `dotted.key=value` strings onto a config dict.

    Values parse as JSON when possible and fall back to raw strings, so
    `gm.lam=0.25`, `seeds=[7,8]` and `gm.variant=m_wgm` all work.
    """
    data = copy.deepcopy(data)
    for item in overrides:
        if "=" not in item:
            raise ValueError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = data
        parts = key.split(".")
        for part in parts[:-1]:
            if part not in node or not isinstance(node[part], dict):
                node[part] = {}
            node = node[part]
        node[parts[-1]] = value
    return data


def load_config(path: str, overrides: Optional[List[str]] = None,
                seed: Optional[int] = None) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if overrides:
        data = apply_overrides(data, overrides)
    if seed is not None:
        data["seeds"] = [int(seed)]
    return RunConfig.from_dict(data)


def save_config(cfg: RunConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
