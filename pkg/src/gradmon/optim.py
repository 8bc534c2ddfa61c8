"""Adam and the gradient-monitored optimizer family.

The gradient-monitored variants wrap Adam. Every update the Adam-adjusted
direction m_hat / (sqrt(v_hat) + eps) is computed per layer; the monitored
variants then zero (or attenuate) the entries whose relative magnitude
|direction| / |weight| falls below a per-layer threshold lam * mean, and
descend along the surviving entries only. Moments accumulate from the raw
gradients for every entry, masked or not, so a weight that re-enters the
active set later does so with warm statistics.

Variants (the `variant` field of GmConfig):

- "wogm": plain Adam, no masking; the unmonitored baseline.
- "f_wgm": binary masks recomputed on the eta schedule, lam frozen.
- "u_wgm": like f_wgm, with lam halved after every recomputation.
- "m_wgm": a soft mask applied every update; the binary mask feeds an
  exponential moving average M_zeta <- M_zeta * zeta + M * (1 - zeta).
- "am_wgm": m_wgm plus reward-driven adaptation of lam: compare the mean
  reward of the window since the last adaptation against the previous
  window (as a ratio chain), step lam by -alpha_lam on improvement and
  +alpha_lam on degradation, clamped to [0, 1].

The schedule counter eta advances once per optimizer step by default; a
training loop that counts episodes instead (the n-step actor-critic here
does) constructs the optimizer with `eta_external=True` and calls
`advance_eta()` itself.

Biases are exempt from masking by default (`mask_biases=False`): they are
few, cheap, and have no fan-in to starve.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from .nn import GradientSet, Network

VARIANTS = ("wogm", "f_wgm", "u_wgm", "m_wgm", "am_wgm")

_DECISION_EPS = 1e-12


@dataclass
class GmConfig:
    """Configuration for the gradient-monitored family."""

    variant: str = "wogm"
    lam: float = 0.5
    zeta: float = 0.999
    eta_start: int = 1500
    eta_repeat: int = 1000
    alpha_lam: float = 0.001
    momentum_init: float = 1.0
    mask_biases: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must lie in [0, 1]")
        # zeta = 1.0 is allowed: it is the exact boundary at which m_wgm
        # with momentum_init=1 degenerates to the unmonitored baseline.
        if not 0.0 <= self.zeta <= 1.0:
            raise ValueError("zeta must lie in [0, 1]")
        if self.eta_start < 0 or self.eta_repeat < 1:
            raise ValueError("eta_start must be >= 0 and eta_repeat >= 1")
        if self.alpha_lam <= 0.0:
            raise ValueError("alpha_lam must be positive")
        if not 0.0 <= self.momentum_init <= 1.0:
            raise ValueError("momentum_init must lie in [0, 1]")


def adam_direction(m: np.ndarray, v: np.ndarray, t: int, grad: np.ndarray,
                   beta1: float, beta2: float, eps: float) -> np.ndarray:
    """One Adam moment update (in place) and the bias-corrected direction."""
    m[...] = beta1 * m + (1.0 - beta1) * grad
    v[...] = beta2 * v + (1.0 - beta2) * (grad * grad)
    m_hat = m / (1.0 - beta1 ** t)
    v_hat = v / (1.0 - beta2 ** t)
    return m_hat / (np.sqrt(v_hat) + eps)


def decision_matrix(direction: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Elementwise |direction| / |weight|, guarded against zero weights."""
    return np.abs(direction) / (np.abs(weights) + _DECISION_EPS)


def layer_threshold(decision: np.ndarray) -> float:
    """Mean of the decision matrix; the per-layer reference magnitude."""
    return float(decision.mean())


def compute_mask(decision: np.ndarray, lam: float) -> np.ndarray:
    """Binary keep-mask: 1 where decision >= lam * mean(decision).

    The comparison is >=, so entries exactly at the threshold stay active
    and lam = 0 keeps every entry (decision matrices are non-negative).
    """
    if lam < 0.0:
        raise ValueError("lam must be non-negative")
    return (decision >= lam * decision.mean()).astype(np.float64)


def episode_reward_mean(rewards: Iterable[float]) -> float:
    """Mean reward of an adaptation window."""
    vals = list(rewards)
    if not vals:
        raise ValueError("empty reward window")
    return float(sum(vals) / len(vals))


class _Param:
    """One parameter array tracked by an optimizer."""

    __slots__ = ("key", "array", "maskable", "m", "v", "mask", "mzeta")

    def __init__(self, key: str, array: np.ndarray, maskable: bool, momentum_init: float):
        self.key = key
        self.array = array
        self.maskable = maskable
        self.m = np.zeros_like(array)
        self.v = np.zeros_like(array)
        self.mask: Optional[np.ndarray] = None
        self.mzeta: Optional[np.ndarray] = None
        if maskable:
            self.mzeta = np.full_like(array, momentum_init)


def _collect_params(net: Network, mask_biases: bool,
                    extra_params: Optional[Dict[str, np.ndarray]],
                    momentum_init: float) -> List[_Param]:
    params = []
    for key, kind, arr in net.parameter_arrays():
        maskable = kind == "weight" or (kind == "bias" and mask_biases)
        params.append(_Param(f"{key}:{kind}", arr, maskable, momentum_init))
    for name, arr in (extra_params or {}).items():
        params.append(_Param(f"extra:{name}", arr, False, momentum_init))
    return params


class AdamOptimizer:
    """Plain Adam over a network's parameters.

    Kept deliberately free of any monitoring plumbing: this is the reference
    the wogm variant is checked against, bit for bit.
    """

    def __init__(self, net: Network, lr: float, betas: Tuple[float, float] = (0.9, 0.999),
                 eps: float = 1e-8, extra_params: Optional[Dict[str, np.ndarray]] = None):
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self._params = _collect_params(net, False, extra_params, 1.0)
        self._t = 0

    def step(self, grads: GradientSet,
             extra_grads: Optional[Dict[str, np.ndarray]] = None) -> None:
        self._t += 1
        t = self._t
        for p in self._params:
            g = _lookup_grad(p.key, grads, extra_grads)
            p.m[...] = self.beta1 * p.m + (1.0 - self.beta1) * g
            p.v[...] = self.beta2 * p.v + (1.0 - self.beta2) * (g * g)
            m_hat = p.m / (1.0 - self.beta1 ** t)
            v_hat = p.v / (1.0 - self.beta2 ** t)
            p.array -= self.lr * (m_hat / (np.sqrt(v_hat) + self.eps))


def _lookup_grad(key: str, grads: GradientSet,
                 extra_grads: Optional[Dict[str, np.ndarray]]) -> np.ndarray:
    prefix, leaf = key.rsplit(":", 1)
    if prefix == "extra":
        # free arrays outside the network, keyed "extra:<name>"
        if extra_grads is None or leaf not in extra_grads:
            raise KeyError(f"missing gradient for {key!r}")
        return extra_grads[leaf]
    if leaf == "weight":
        return grads.weights[prefix]
    if leaf == "bias":
        return grads.biases[prefix]
    raise KeyError(f"missing gradient for {key!r}")


class GmOptimizer:
    """Adam with gradient monitoring; see the module docstring for variants."""

    def __init__(self, net: Network, cfg: GmConfig, lr: float,
                 betas: Tuple[float, float] = (0.9, 0.999), eps: float = 1e-8,
                 extra_params: Optional[Dict[str, np.ndarray]] = None,
                 eta_external: bool = False):
        self.cfg = cfg
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.lam = cfg.lam
        self.eta = 0
        self.eta_external = eta_external
        self._params = _collect_params(net, cfg.mask_biases, extra_params, cfg.momentum_init)
        self._t = 0
        self._reward_window: List[float] = []
        self._r_o: Optional[float] = None
        self._phi_o = 1.0
        self._last_mask_eta = -1
        self._last_adapt_eta = -1
        self._last_metrics = {"abs_grad_sum": 0.0, "active_pct": 100.0, "lam": self.lam}

    # -- schedule plumbing ---------------------------------------------------

    def advance_eta(self) -> None:
        """Advance the schedule counter; only valid with eta_external=True."""
        if not self.eta_external:
            raise RuntimeError("eta advances internally for this optimizer")
        self.eta += 1
        if self.cfg.variant == "am_wgm":
            self._maybe_adapt()

    def observe_rewards(self, rewards: Iterable[float]) -> None:
        """Feed rewards into the adaptation window (am_wgm only, no-op otherwise)."""
        if self.cfg.variant == "am_wgm":
            self._reward_window.extend(float(r) for r in rewards)

    def _schedule_hit(self) -> bool:
        c = self.cfg
        return self.eta >= c.eta_start and (self.eta - c.eta_start) % c.eta_repeat == 0

    def _maybe_adapt(self) -> None:
        c = self.cfg
        if self.eta < c.eta_start or self.eta % c.eta_repeat != 0:
            return
        if self.eta == self._last_adapt_eta or not self._reward_window:
            return
        self._last_adapt_eta = self.eta
        r_n = episode_reward_mean(self._reward_window)
        self._reward_window.clear()
        if self._r_o is None:
            # first eligible event only records the reference window
            self._r_o = r_n
            self._phi_o = 1.0
            return
        if self._r_o > 0.0:
            phi_n = r_n / self._r_o
            improved = phi_n >= self._phi_o
        else:
            # ratios are meaningless against a non-positive reference
            improved = r_n >= self._r_o
            phi_n = 1.0
        change = -1.0 if improved else 1.0
        self.lam = min(1.0, max(0.0, self.lam + c.alpha_lam * change))
        self._phi_o = phi_n
        self._r_o = r_n

    # -- the update ----------------------------------------------------------

    def step(self, grads: GradientSet,
             extra_grads: Optional[Dict[str, np.ndarray]] = None) -> Dict[str, float]:
        """Apply one update; returns the metrics row for this step."""
        variant = self.cfg.variant
        self._t += 1
        if not self.eta_external:
            self.eta += 1
            if variant == "am_wgm":
                self._maybe_adapt()

        recompute = False
        if variant in ("f_wgm", "u_wgm"):
            if self._schedule_hit() and self.eta != self._last_mask_eta:
                recompute = True
                self._last_mask_eta = self.eta

        abs_grad_sum = 0.0
        active_entries = 0.0
        total_entries = 0
        masked_any = False

        for p in self._params:
            g = _lookup_grad(p.key, grads, extra_grads)
            if not np.isfinite(g).all():
                raise FloatingPointError(f"non-finite gradient for {p.key!r}")
            direction = adam_direction(p.m, p.v, self._t, g, self.beta1, self.beta2, self.eps)

            applied = direction
            if p.maskable:
                if variant in ("m_wgm", "am_wgm"):
                    decision = decision_matrix(direction, p.array)
                    mask = compute_mask(decision, self.lam)
                    p.mzeta[...] = p.mzeta * self.cfg.zeta + mask * (1.0 - self.cfg.zeta)
                    applied = p.mzeta * direction
                    active_entries += float(p.mzeta.sum())
                    total_entries += p.mzeta.size
                    masked_any = True
                elif variant in ("f_wgm", "u_wgm"):
                    if recompute:
                        decision = decision_matrix(direction, p.array)
                        p.mask = compute_mask(decision, self.lam)
                    if p.mask is not None:
                        applied = p.mask * direction
                        active_entries += float(p.mask.sum())
                        total_entries += p.mask.size
                        masked_any = True

            p.array -= self.lr * applied
            if p.key.endswith(":weight"):
                abs_grad_sum += float(np.abs(applied).sum())

        if recompute and variant == "u_wgm":
            self.lam = self.lam / 2.0

        active_pct = 100.0 * active_entries / total_entries if masked_any else 100.0
        self._last_metrics = {
            "abs_grad_sum": abs_grad_sum,
            "active_pct": active_pct,
            "lam": self.lam,
        }
        return dict(self._last_metrics)

    def metrics(self) -> Dict[str, float]:
        """Metrics of the most recent step (the CSV row fields)."""
        return dict(self._last_metrics)

    # -- serialization ---------------------------------------------------------

    def state_dict(self) -> dict:
        return {
            "t": self._t,
            "eta": self.eta,
            "lam": self.lam,
            "r_o": self._r_o,
            "phi_o": self._phi_o,
            "last_mask_eta": self._last_mask_eta,
            "last_adapt_eta": self._last_adapt_eta,
            "reward_window": list(self._reward_window),
            "params": {
                p.key: {
                    "m": p.m.tolist(),
                    "v": p.v.tolist(),
                    "mask": None if p.mask is None else p.mask.tolist(),
                    "mzeta": None if p.mzeta is None else p.mzeta.tolist(),
                }
                for p in self._params
            },
        }

    def load_state_dict(self, state: dict) -> None:
        self._t = int(state["t"])
        self.eta = int(state["eta"])
        self.lam = float(state["lam"])
        self._r_o = None if state["r_o"] is None else float(state["r_o"])
        self._phi_o = float(state["phi_o"])
        self._last_mask_eta = int(state["last_mask_eta"])
        self._last_adapt_eta = int(state["last_adapt_eta"])
        self._reward_window = [float(r) for r in state["reward_window"]]
        for p in self._params:
            entry = state["params"][p.key]
            p.m[...] = np.asarray(entry["m"], dtype=np.float64)
            p.v[...] = np.asarray(entry["v"], dtype=np.float64)
            p.mask = None if entry["mask"] is None else np.asarray(entry["mask"], dtype=np.float64)
            if entry["mzeta"] is None:
                p.mzeta = None
            else:
                p.mzeta = np.asarray(entry["mzeta"], dtype=np.float64)
