"""Finite-difference audit of the analytic gradients.

Builds a few random actor-critic networks, pushes random minibatches
through the n-step actor-critic loss and the clipped-surrogate loss, and
compares every analytic partial against a central finite difference. The
worst relative error per loss is printed; anything above 1e-4 would point
at a broken backward pass.
"""

import numpy as np

from gradmon.a2c import A2cConfig, a2c_loss_and_grads
from gradmon.nn import (LayerSpec, Network, fd_gradient_array,
                        fd_gradient_oracle, init_parameters)
from gradmon.policy import gaussian_log_probs
from gradmon.ppo import PpoConfig, ppo_loss_and_grads
from gradmon.rng import Rng


def random_net(rng, input_dim, hidden, n_out, actor_act):
    trunk = [LayerSpec(input_dim, hidden, "sigmoid"),
             LayerSpec(hidden, hidden, "tanh")]
    heads = {
        "actor": [LayerSpec(hidden, n_out, actor_act)],
        "critic": [LayerSpec(hidden, 1, "linear")],
    }
    net = Network(trunk, heads)
    init_parameters(net, seed=rng.integer(2**31))
    return net


def max_rel(analytic, numeric):
    worst = 0.0
    for kind in ("weights", "biases"):
        a, n = getattr(analytic, kind), getattr(numeric, kind)
        for key in a:
            denom = np.maximum(np.abs(a[key]) + np.abs(n[key]), 1e-8)
            worst = max(worst, float(np.max(np.abs(a[key] - n[key]) / denom)))
    return worst


def check_a2c(rng):
    net = random_net(rng, input_dim=5, hidden=8, n_out=4, actor_act="softmax")
    batch = 6
    states = rng.normal((batch, 5))
    actions = np.array([rng.integer(4) for _ in range(batch)])
    advantages = rng.normal(batch)
    returns = rng.normal(batch)
    cfg = A2cConfig(entropy_coef=0.01)

    def loss_fn(n):
        return a2c_loss_and_grads(n, states, actions, advantages, returns, cfg)[0]

    _, grads = a2c_loss_and_grads(net, states, actions, advantages, returns, cfg)
    numeric = fd_gradient_oracle(net, loss_fn)
    return max_rel(grads, numeric)


def check_ppo(rng):
    net = random_net(rng, input_dim=3, hidden=8, n_out=1, actor_act="linear")
    log_std = np.array([-0.4])
    batch = 6
    states = rng.normal((batch, 3))
    actions = rng.normal((batch, 1))
    advantages = rng.normal(batch)
    targets = rng.normal(batch)
    means = net.forward_many(states)["actor"]
    old = gaussian_log_probs(means, log_std, actions)
    old = old + rng.uniform(-0.05, 0.05, batch)
    cfg = PpoConfig(entropy_coef=0.01)

    def loss_fn(n=net, s=log_std):
        return ppo_loss_and_grads(n, s, states, actions, advantages,
                                  targets, old, cfg)[0]

    _, grads, std_grad, _ = ppo_loss_and_grads(net, log_std, states, actions,
                                               advantages, targets, old, cfg)
    numeric = fd_gradient_oracle(net, loss_fn)
    worst = max_rel(grads, numeric)
    fd_std = fd_gradient_array(loss_fn, log_std)
    denom = np.maximum(np.abs(std_grad) + np.abs(fd_std), 1e-8)
    return max(worst, float(np.max(np.abs(std_grad - fd_std) / denom)))


def main():
    rng = Rng(7)
    print("loss            worst relative error")
    for trial in range(3):
        print(f"a2c  (trial {trial})   {check_a2c(rng):.3e}")
    for trial in range(3):
        print(f"ppo  (trial {trial})   {check_ppo(rng):.3e}")
    print("anything below 1e-4 means analytic and numeric gradients agree")


if __name__ == "__main__":
    main()
