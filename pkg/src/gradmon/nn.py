"""Dense feed-forward networks with a shared trunk and named heads.

Parameters are plain float64 numpy arrays. A network is an ordered trunk of
fully connected layers feeding one or more named head stacks (for example
"actor" and "critic"). Forward passes can cache intermediate activations per
head; backward passes consume those caches and accumulate gradients, so two
heads back-propagating before an optimizer step sum their contributions in
the shared trunk.

The finite-difference oracle in this module is the reference the analytic
backward pass is tested against: central differences, (L(w+h) - L(w-h)) / 2h.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Mapping, Sequence, Tuple

import numpy as np

from .rng import Rng

ACTIVATIONS = ("relu", "sigmoid", "tanh", "linear", "softmax")


@dataclass(frozen=True)
class LayerSpec:
    """Shape and nonlinearity of one dense layer."""

    in_dim: int
    out_dim: int
    activation: str

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1:
            raise ValueError("layer dimensions must be positive")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")


class _DenseLayer:
    """Weights and bias for one LayerSpec. W has shape (in_dim, out_dim)."""

    __slots__ = ("spec", "W", "b")

    def __init__(self, spec: LayerSpec):
        self.spec = spec
        self.W = np.zeros((spec.in_dim, spec.out_dim))
        self.b = np.zeros(spec.out_dim)


def _apply_activation(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "sigmoid":
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    if name == "tanh":
        return np.tanh(z)
    if name == "linear":
        return z
    if name == "softmax":
        shifted = z - z.max(axis=1, keepdims=True)
        ez = np.exp(shifted)
        return ez / ez.sum(axis=1, keepdims=True)
    raise ValueError(f"unknown activation {name!r}")


def _activation_backward(name: str, grad_a: np.ndarray, z: np.ndarray,
                         a: np.ndarray) -> np.ndarray:
    """Map dL/da to dL/dz for one layer."""
    if name == "relu":
        return grad_a * (z > 0.0)
    if name == "sigmoid":
        return grad_a * a * (1.0 - a)
    if name == "tanh":
        return grad_a * (1.0 - a * a)
    if name == "linear":
        return grad_a
    if name == "softmax":
        # full Jacobian product: dz_j = a_j * (g_j - sum_k g_k a_k)
        inner = (grad_a * a).sum(axis=1, keepdims=True)
        return a * (grad_a - inner)
    raise ValueError(f"unknown activation {name!r}")


class GradientSet:
    """Per-layer weight and bias gradients, keyed like the owning network."""

    def __init__(self, weights: Dict[str, np.ndarray], biases: Dict[str, np.ndarray]):
        self.weights = weights
        self.biases = biases

    @classmethod
    def zeros_like(cls, net: "Network") -> "GradientSet":
        w = {key: np.zeros_like(layer.W) for key, layer in net.layers()}
        b = {key: np.zeros_like(layer.b) for key, layer in net.layers()}
        return cls(w, b)

    def keys(self):
        return self.weights.keys()

    def total_abs_sum(self) -> float:
        total = 0.0
        for g in self.weights.values():
            total += float(np.abs(g).sum())
        for g in self.biases.values():
            total += float(np.abs(g).sum())
        return total

    def all_finite(self) -> bool:
        return all(np.isfinite(g).all() for g in self.weights.values()) and \
            all(np.isfinite(g).all() for g in self.biases.values())


class Network:
    """Trunk plus named heads; every parameter is reachable by a string key.

    Keys look like "trunk/0" or "actor/1". Layer order within the trunk and
    each head follows the spec lists; heads keep insertion order.
    """

    def __init__(self, trunk: Sequence[LayerSpec], heads: Mapping[str, Sequence[LayerSpec]]):
        if not heads:
            raise ValueError("a network needs at least one head")
        trunk = list(trunk)
        for prev, nxt in zip(trunk, trunk[1:]):
            if prev.out_dim != nxt.in_dim:
                raise ValueError("trunk layer dimensions do not chain")
        for spec in trunk:
            if spec.activation == "softmax":
                raise ValueError("softmax is only permitted as the final layer of a head")

        join_dim = trunk[-1].out_dim if trunk else None
        head_map: Dict[str, List[LayerSpec]] = {}
        for name, specs in heads.items():
            specs = list(specs)
            if not specs:
                raise ValueError(f"head {name!r} is empty")
            if join_dim is not None and specs[0].in_dim != join_dim:
                raise ValueError(f"head {name!r} does not match the trunk output size")
            for prev, nxt in zip(specs, specs[1:]):
                if prev.out_dim != nxt.in_dim:
                    raise ValueError(f"head {name!r} layer dimensions do not chain")
            for spec in specs[:-1]:
                if spec.activation == "softmax":
                    raise ValueError("softmax is only permitted as the final layer of a head")
            head_map[name] = specs

        first_dims = {specs[0].in_dim for specs in head_map.values()}
        if join_dim is None and len(first_dims) > 1:
            raise ValueError("with an empty trunk all heads must share the input size")

        self.trunk = [_DenseLayer(s) for s in trunk]
        self.heads = {name: [_DenseLayer(s) for s in specs] for name, specs in head_map.items()}
        self.input_dim = trunk[0].in_dim if trunk else next(iter(first_dims))
        self._cache: Dict[str, dict] = {}
        self._grads = GradientSet.zeros_like(self)

    def layers(self) -> Iterator[Tuple[str, _DenseLayer]]:
        for i, layer in enumerate(self.trunk):
            yield f"trunk/{i}", layer
        for name, stack in self.heads.items():
            for i, layer in enumerate(stack):
                yield f"{name}/{i}", layer

    def head_names(self) -> List[str]:
        return list(self.heads.keys())

    def output_dim(self, head: str) -> int:
        return self._head(head)[-1].spec.out_dim

    def _head(self, name: str) -> List[_DenseLayer]:
        if name not in self.heads:
            raise KeyError(f"unknown head {name!r}")
        return self.heads[name]

    @staticmethod
    def _as_batch(x) -> np.ndarray:
        arr = np.asarray(x, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2:
            raise ValueError("input must be a vector or a (batch, features) matrix")
        return arr

    def _run_stack(self, stack: List[_DenseLayer], x: np.ndarray, record: list | None):
        for layer in stack:
            z = x @ layer.W + layer.b
            a = _apply_activation(layer.spec.activation, z)
            if record is not None:
                record.append((x, z, a))
            x = a
        return x

    def forward(self, x, head: str, cache: bool = False) -> np.ndarray:
        """Run trunk + one head; cache activations if a backward will follow."""
        return self.forward_many(x, [head], cache=cache)[head]

    def forward_many(self, x, heads: Sequence[str] | None = None,
                     cache: bool = False) -> Dict[str, np.ndarray]:
        """Run trunk once and several heads on the same input."""
        x = self._as_batch(x)
        if x.shape[1] != self.input_dim:
            raise ValueError(f"expected {self.input_dim} input features, got {x.shape[1]}")
        if heads is None:
            heads = self.head_names()
        for name in heads:
            self._head(name)

        trunk_record: list | None = [] if cache else None
        trunk_out = self._run_stack(self.trunk, x, trunk_record)
        outputs: Dict[str, np.ndarray] = {}
        for name in heads:
            head_record: list | None = [] if cache else None
            outputs[name] = self._run_stack(self.heads[name], trunk_out, head_record)
            if cache:
                self._cache[name] = {"trunk": trunk_record, "head": head_record}
        return outputs

    def backward(self, grad_output, head: str) -> GradientSet:
        """Back-propagate dL/d(head output); accumulates into the gradient set.

        Requires a cached forward for the head. Trunk gradients add up across
        heads, so call backward once per head and then read `grads`.
        """
        self._head(head)
        if head not in self._cache:
            raise RuntimeError(f"no cached forward pass for head {head!r}")
        entry = self._cache.pop(head)
        grad = np.asarray(grad_output, dtype=np.float64)
        if grad.ndim == 1:
            grad = grad.reshape(1, -1)

        grad = self._stack_backward(self.heads[head], f"{head}/", entry["head"], grad)
        self._stack_backward(self.trunk, "trunk/", entry["trunk"], grad)
        return self._grads

    def _stack_backward(self, stack, prefix, records, grad):
        for i in range(len(stack) - 1, -1, -1):
            layer = stack[i]
            x, z, a = records[i]
            if grad.shape != a.shape:
                raise ValueError(f"gradient shape {grad.shape} does not match output {a.shape}")
            dz = _activation_backward(layer.spec.activation, grad, z, a)
            self._grads.weights[f"{prefix}{i}"] += x.T @ dz
            self._grads.biases[f"{prefix}{i}"] += dz.sum(axis=0)
            grad = dz @ layer.W.T
        return grad

    @property
    def grads(self) -> GradientSet:
        return self._grads

    def zero_grads(self) -> None:
        self._grads = GradientSet.zeros_like(self)
        self._cache.clear()

    def parameter_arrays(self) -> Iterator[Tuple[str, str, np.ndarray]]:
        """Yield (key, kind, array) with kind in {"weight", "bias"}."""
        for key, layer in self.layers():
            yield key, "weight", layer.W
            yield key, "bias", layer.b

    def get_layer(self, key: str) -> _DenseLayer:
        for k, layer in self.layers():
            if k == key:
                return layer
        raise KeyError(f"unknown layer {key!r}")

    def state_dict(self) -> dict:
        return {key: {"W": layer.W.tolist(), "b": layer.b.tolist()}
                for key, layer in self.layers()}

    def load_state_dict(self, state: dict) -> None:
        for key, layer in self.layers():
            entry = state[key]
            W = np.asarray(entry["W"], dtype=np.float64)
            b = np.asarray(entry["b"], dtype=np.float64)
            if W.shape != layer.W.shape or b.shape != layer.b.shape:
                raise ValueError(f"checkpoint shape mismatch at layer {key!r}")
            layer.W[...] = W
            layer.b[...] = b

    def clone(self) -> "Network":
        specs_trunk = [l.spec for l in self.trunk]
        specs_heads = {name: [l.spec for l in stack] for name, stack in self.heads.items()}
        other = Network(specs_trunk, specs_heads)
        for (_, src), (_, dst) in zip(self.layers(), other.layers()):
            dst.W[...] = src.W
            dst.b[...] = src.b
        return other


def init_parameters(net: Network, seed: int) -> Network:
    """Glorot-uniform weights, zero biases; deterministic in the seed.

    Each weight entry is drawn from U(-a, a) with a = sqrt(6 / (fan_in +
    fan_out)), layer by layer in network order.
    """
    rng = Rng(seed)
    for _, layer in net.layers():
        bound = np.sqrt(6.0 / (layer.spec.in_dim + layer.spec.out_dim))
        layer.W[...] = rng.uniform(-bound, bound, size=layer.W.shape)
        layer.b[...] = 0.0
    return net


def fd_gradient_oracle(net: Network, loss_fn: Callable[[Network], float],
                       h: float = 1e-6) -> GradientSet:
    """Central-difference gradients of a scalar loss over every parameter.

    Slow by construction; this is the reference implementation used to test
    the analytic backward pass, never a code path for training.
    """
    grads = GradientSet.zeros_like(net)
    for key, layer in net.layers():
        for arr, out in ((layer.W, grads.weights[key]), (layer.b, grads.biases[key])):
            flat = arr.reshape(-1)
            gflat = out.reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + h
                hi = loss_fn(net)
                flat[i] = orig - h
                lo = loss_fn(net)
                flat[i] = orig
                gflat[i] = (hi - lo) / (2.0 * h)
    return grads


def fd_gradient_array(loss_fn: Callable[[], float], arr: np.ndarray,
                      h: float = 1e-6) -> np.ndarray:
    """Central differences over one free-standing parameter array."""
    grad = np.zeros_like(arr)
    flat = arr.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        hi = loss_fn()
        flat[i] = orig - h
        lo = loss_fn()
        flat[i] = orig
        gflat[i] = (hi - lo) / (2.0 * h)
    return grad
