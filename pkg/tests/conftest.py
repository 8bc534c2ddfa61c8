"""Shared builders for the test suite."""

import numpy as np
import pytest

from gradmon.nn import LayerSpec, Network, init_parameters

ACTIVATION_POOL = ("relu", "sigmoid", "tanh", "linear")


def small_ac_net(input_dim=4, hidden=6, n_actions=3, seed=0):
    """A tiny trunk + actor/critic network, initialized."""
    net = Network(
        [LayerSpec(input_dim, hidden, "sigmoid")],
        {"actor": [LayerSpec(hidden, n_actions, "softmax")],
         "critic": [LayerSpec(hidden, 1, "linear")]},
    )
    return init_parameters(net, seed)


def random_net(rng: np.random.Generator, max_layers=4, max_units=16,
               heads=("actor", "critic"), softmax_actor=True):
    """Random trunk/head shapes within bounds; weights seeded from rng."""
    input_dim = int(rng.integers(2, 8))
    n_trunk = int(rng.integers(0, max_layers - 1))
    dims = [input_dim] + [int(rng.integers(2, max_units + 1)) for _ in range(n_trunk)]
    trunk = [LayerSpec(dims[i], dims[i + 1], str(rng.choice(ACTIVATION_POOL)))
             for i in range(n_trunk)]
    join = dims[-1]
    head_specs = {}
    for name in heads:
        width = int(rng.integers(2, max_units + 1))
        if name == "actor":
            out = int(rng.integers(2, 6))
            final = "softmax" if softmax_actor else "linear"
        else:
            out = 1
            final = "linear"
        head_specs[name] = [LayerSpec(join, width, str(rng.choice(ACTIVATION_POOL))),
                            LayerSpec(width, out, final)]
    net = Network(trunk, head_specs)
    return init_parameters(net, int(rng.integers(0, 2 ** 31)))


def max_rel_error(analytic, numeric, floor=1e-8):
    """max |a - n| / max(floor, |a| + |n|) over two gradient sets."""
    worst = 0.0
    for store_a, store_n in ((analytic.weights, numeric.weights),
                             (analytic.biases, numeric.biases)):
        for key in store_a:
            a = store_a[key]
            n = store_n[key]
            denom = np.maximum(floor, np.abs(a) + np.abs(n))
            worst = max(worst, float((np.abs(a - n) / denom).max()))
    return worst


@pytest.fixture
def nprng():
    return np.random.default_rng(20240817)
