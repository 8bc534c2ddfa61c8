"""Deterministic random number generation.

Every stochastic component (environment resets, policy sampling, weight
init, minibatch shuffling) draws from its own stream derived from a single
master seed, so a run is fully reproducible from that one integer.

The core generator is xoshiro256** (Blackman & Vigna), a 64-bit generator
with a 256-bit state. Seeds are expanded into the state with splitmix64,
and per-component streams are derived by folding a text label into the
master seed (FNV-1a) before expansion. Gaussian draws use the Box-Muller
transform with exactly two uniforms per value, so the stream position is
a simple function of the number of values drawn.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

_MASK64 = (1 << 64) - 1


def _splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state once; returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def _fnv1a(label: str) -> int:
    h = 0xCBF29CE484222325
    for byte in label.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return h


def derive_seed(master_seed: int, label: str) -> int:
    """Map (master seed, component label) to an independent child seed."""
    _, mixed = _splitmix64((master_seed ^ _fnv1a(label)) & _MASK64)
    return mixed


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Rng:
    """xoshiro256** stream with the sampling helpers the package needs."""

    def __init__(self, seed: int):
        # splitmix64 expansion guarantees a non-zero xoshiro state
        state = seed & _MASK64
        words = []
        for _ in range(4):
            state, out = _splitmix64(state)
            words.append(out)
        self._s = words

    def spawn(self, label: str) -> "Rng":
        """Derive an independent child stream named by a label."""
        return Rng(derive_seed(self._s[0] ^ self._s[3], label))

    def next_uint64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Uniform float64 in [0, 1) with 53 random bits."""
        return (self.next_uint64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low: float, high: float, size=None):
        if size is None:
            return low + (high - low) * self.random()
        n = int(np.prod(size))
        vals = np.empty(n, dtype=np.float64)
        for i in range(n):
            vals[i] = self.random()
        return (low + (high - low) * vals).reshape(size)

    def normal(self, size=None):
        """Standard normal draws; two uniforms consumed per value."""
        if size is None:
            return self._one_normal()
        n = int(np.prod(size))
        vals = np.empty(n, dtype=np.float64)
        for i in range(n):
            vals[i] = self._one_normal()
        return vals.reshape(size)

    def _one_normal(self) -> float:
        # Box-Muller; u1 is kept away from zero so log() stays finite
        u1 = 1.0 - self.random()
        u2 = self.random()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def integer(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection, free of modulo bias."""
        if n <= 0:
            raise ValueError("integer() needs n >= 1")
        limit = (_MASK64 + 1) - ((_MASK64 + 1) % n)
        while True:
            x = self.next_uint64()
            if x < limit:
                return x % n

    def categorical(self, probs: Sequence[float]) -> int:
        """Sample an index from a probability vector by CDF inversion."""
        u = self.random()
        acc = 0.0
        last = len(probs) - 1
        for i, p in enumerate(probs):
            acc += p
            if u < acc:
                return i
        return last

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates permutation of range(n)."""
        idx = np.arange(n)
        for i in range(n - 1, 0, -1):
            j = self.integer(i + 1)
            idx[i], idx[j] = idx[j], idx[i]
        return idx

    def state_dict(self) -> dict:
        return {"s": [str(w) for w in self._s]}

    def load_state_dict(self, state: dict) -> None:
        words = [int(w) & _MASK64 for w in state["s"]]
        if len(words) != 4 or not any(words):
            raise ValueError("invalid generator state")
        self._s = words
