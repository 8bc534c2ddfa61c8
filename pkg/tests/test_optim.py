"""Optimizer family: Adam arithmetic, masking algebra, schedules, adaptation."""

import numpy as np
import pytest

from gradmon.nn import GradientSet, LayerSpec, Network, init_parameters
from gradmon.optim import (AdamOptimizer, GmConfig, GmOptimizer, adam_direction,
                           compute_mask, decision_matrix, episode_reward_mean,
                           layer_threshold)

from conftest import small_ac_net


def random_grads(net, nprng, scale=1.0):
    g = GradientSet.zeros_like(net)
    for k in g.weights:
        g.weights[k][...] = nprng.normal(size=g.weights[k].shape) * scale
    for k in g.biases:
        g.biases[k][...] = nprng.normal(size=g.biases[k].shape) * scale
    return g


def constant_grads(net, value):
    g = GradientSet.zeros_like(net)
    for k in g.weights:
        g.weights[k][...] = value
    for k in g.biases:
        g.biases[k][...] = value
    return g


def param_arrays(net):
    return {f"{k}:{kind}": arr for k, kind, arr in net.parameter_arrays()}


def spread_net():
    """Single 1x2 weight layer with a huge second weight.

    Constant unit gradients give a direction near (1, 1), so the decision
    matrix is near (1, 1e-6) with mean about 0.5: at lam = 0.5 the binary
    mask is exactly (1, 0), which makes mask timing observable.
    """
    net = Network([], {"out": [LayerSpec(1, 2, "linear")]})
    layer = net.get_layer("out/0")
    layer.W[...] = np.array([[1.0, 1.0e6]])
    layer.b[...] = 0.0
    return net


class TestAdamDirection:
    def test_first_step_has_unit_magnitude(self):
        m = np.zeros(3)
        v = np.zeros(3)
        g = np.array([3.0, -0.7, 12.0])
        d = adam_direction(m, v, 1, g, 0.9, 0.999, 1e-8)
        # bias correction cancels the decay at t=1; |d| = |g| / (|g| + eps)
        assert np.all(np.abs(np.abs(d) - 1.0) < 1e-7)
        assert np.all(np.sign(d) == np.sign(g))

    def test_moments_updated_in_place(self):
        m = np.zeros(2)
        v = np.zeros(2)
        g = np.array([2.0, -4.0])
        adam_direction(m, v, 1, g, 0.9, 0.999, 1e-8)
        np.testing.assert_allclose(m, 0.1 * g, rtol=1e-15)
        np.testing.assert_allclose(v, 0.001 * g * g, rtol=1e-15)

    def test_two_step_hand_value(self):
        # g = +1 then -1: m2 = 0.9*0.1 - 0.1 = -0.01, m_hat2 = -0.01/0.19,
        # v_hat2 = 1, so d2 is -0.01/0.19 up to the eps in the denominator.
        m = np.zeros(1)
        v = np.zeros(1)
        adam_direction(m, v, 1, np.array([1.0]), 0.9, 0.999, 1e-8)
        d2 = adam_direction(m, v, 2, np.array([-1.0]), 0.9, 0.999, 1e-8)
        assert abs(d2[0] - (-0.01 / 0.19)) < 1e-8

    def test_constant_gradient_stays_unit(self):
        m = np.zeros(1)
        v = np.zeros(1)
        g = np.array([2.0])
        for t in range(1, 11):
            d = adam_direction(m, v, t, g, 0.9, 0.999, 1e-8)
            assert abs(d[0] - 1.0) < 1e-7


class TestMaskingAlgebra:
    def test_decision_matrix_frozen_values(self):
        d = decision_matrix(np.array([[1.0, -2.0]]), np.array([[0.5, 4.0]]))
        np.testing.assert_allclose(d, [[2.0, 0.5]], rtol=1e-9)

    def test_decision_matrix_zero_weight_guard(self):
        d = decision_matrix(np.array([1.0]), np.array([0.0]))
        assert np.isclose(d[0], 1e12, rtol=1e-6)

    def test_layer_threshold_is_mean(self):
        decision = np.array([[0.1, 0.3], [0.5, 0.9]])
        assert abs(layer_threshold(decision) - 0.45) < 1e-12

    def test_mask_frozen_example(self):
        decision = np.array([[0.1, 0.3], [0.5, 0.9]])
        np.testing.assert_array_equal(compute_mask(decision, 1.0),
                                      [[0.0, 0.0], [1.0, 1.0]])
        np.testing.assert_array_equal(compute_mask(decision, 0.5),
                                      [[0.0, 1.0], [1.0, 1.0]])

    def test_threshold_tie_stays_active(self):
        decision = np.array([[1.0, 1.0]])
        np.testing.assert_array_equal(compute_mask(decision, 1.0), [[1.0, 1.0]])

    def test_lam_zero_keeps_everything(self):
        decision = np.array([[0.0, 5.0, 1e-30]])
        np.testing.assert_array_equal(compute_mask(decision, 0.0), [[1.0, 1.0, 1.0]])

    def test_negative_lam_rejected(self):
        with pytest.raises(ValueError):
            compute_mask(np.ones((2, 2)), -0.1)

    def test_random_masks_binary_and_monotone(self, nprng):
        for _ in range(300):
            shape = (int(nprng.integers(1, 9)), int(nprng.integers(1, 9)))
            decision = np.abs(nprng.normal(size=shape))
            lam_lo = float(nprng.uniform(0.0, 1.0))
            lam_hi = float(nprng.uniform(lam_lo, 1.0))
            lo = compute_mask(decision, lam_lo)
            hi = compute_mask(decision, lam_hi)
            assert set(np.unique(lo)) <= {0.0, 1.0}
            np.testing.assert_array_equal(
                lo, (decision >= lam_lo * decision.mean()).astype(float))
            # raising lam can only deactivate entries
            assert np.all(hi <= lo)


class TestConfigValidation:
    def test_rejects_bad_fields(self):
        with pytest.raises(ValueError):
            GmConfig(variant="adamw")
        with pytest.raises(ValueError):
            GmConfig(lam=1.5)
        with pytest.raises(ValueError):
            GmConfig(zeta=-0.1)
        with pytest.raises(ValueError):
            GmConfig(zeta=1.1)
        with pytest.raises(ValueError):
            GmConfig(eta_repeat=0)
        with pytest.raises(ValueError):
            GmConfig(alpha_lam=0.0)
        with pytest.raises(ValueError):
            GmConfig(momentum_init=1.5)

    def test_zeta_one_is_legal(self):
        assert GmConfig(variant="m_wgm", zeta=1.0).zeta == 1.0


class TestEquivalences:
    """Variants that degenerate to plain Adam must match it bit for bit."""

    def run_pair(self, opt_a, opt_b, net_a, net_b, steps=25, seed=7,
                 extra_a=None, extra_b=None):
        gen_a = np.random.default_rng(seed)
        gen_b = np.random.default_rng(seed)
        for _ in range(steps):
            ga = random_grads(net_a, gen_a)
            gb = random_grads(net_b, gen_b)
            ea = None if extra_a is None else {"log_std": gen_a.normal(size=extra_a["log_std"].shape)}
            eb = None if extra_b is None else {"log_std": gen_b.normal(size=extra_b["log_std"].shape)}
            opt_a.step(ga, ea)
            opt_b.step(gb, eb)
        pa = param_arrays(net_a)
        pb = param_arrays(net_b)
        assert pa.keys() == pb.keys()
        for key in pa:
            assert np.array_equal(pa[key], pb[key]), key
        if extra_a is not None:
            assert np.array_equal(extra_a["log_std"], extra_b["log_std"])

    def test_wogm_matches_reference_adam(self):
        net_a = small_ac_net(seed=11)
        net_b = net_a.clone()
        extra_a = {"log_std": np.zeros(2)}
        extra_b = {"log_std": np.zeros(2)}
        opt_a = GmOptimizer(net_a, GmConfig(variant="wogm"), lr=1e-3,
                            extra_params=extra_a)
        opt_b = AdamOptimizer(net_b, lr=1e-3, extra_params=extra_b)
        self.run_pair(opt_a, opt_b, net_a, net_b, extra_a=extra_a, extra_b=extra_b)

    def test_mwgm_zeta_one_matches_wogm(self):
        net_a = small_ac_net(seed=12)
        net_b = net_a.clone()
        cfg = GmConfig(variant="m_wgm", lam=0.5, zeta=1.0, momentum_init=1.0)
        opt_a = GmOptimizer(net_a, cfg, lr=1e-3)
        opt_b = GmOptimizer(net_b, GmConfig(variant="wogm"), lr=1e-3)
        self.run_pair(opt_a, opt_b, net_a, net_b)

    def test_fwgm_lam_zero_matches_wogm(self):
        net_a = small_ac_net(seed=13)
        net_b = net_a.clone()
        cfg = GmConfig(variant="f_wgm", lam=0.0, eta_start=1, eta_repeat=1)
        opt_a = GmOptimizer(net_a, cfg, lr=1e-3)
        opt_b = GmOptimizer(net_b, GmConfig(variant="wogm"), lr=1e-3)
        self.run_pair(opt_a, opt_b, net_a, net_b)


class TestSchedule:
    def test_uwgm_halves_lam_on_the_recompute_schedule(self):
        net = small_ac_net(seed=3)
        cfg = GmConfig(variant="u_wgm", lam=0.5, eta_start=2, eta_repeat=2)
        opt = GmOptimizer(net, cfg, lr=1e-3)
        gen = np.random.default_rng(0)
        seen = [opt.step(random_grads(net, gen))["lam"] for _ in range(6)]
        assert seen == [0.5, 0.25, 0.25, 0.125, 0.125, 0.0625]

    def test_fwgm_active_pct_flips_only_at_recompute(self):
        net = spread_net()
        cfg = GmConfig(variant="f_wgm", lam=0.5, eta_start=3, eta_repeat=2)
        opt = GmOptimizer(net, cfg, lr=1e-2)
        actives = [opt.step(constant_grads(net, 1.0))["active_pct"]
                   for _ in range(5)]
        # no mask exists before eta_start, then the (1, 0) mask holds
        assert actives[0] == 100.0 and actives[1] == 100.0
        assert actives[2] == 50.0 and actives[3] == 50.0 and actives[4] == 50.0

    def test_external_eta_recomputes_once_per_eta(self):
        net = small_ac_net(seed=4)
        cfg = GmConfig(variant="u_wgm", lam=0.5, eta_start=1, eta_repeat=1)
        opt = GmOptimizer(net, cfg, lr=1e-3, eta_external=True)
        gen = np.random.default_rng(1)
        opt.advance_eta()
        assert opt.step(random_grads(net, gen))["lam"] == 0.25
        # second step within the same eta must not halve again
        assert opt.step(random_grads(net, gen))["lam"] == 0.25
        opt.advance_eta()
        assert opt.step(random_grads(net, gen))["lam"] == 0.125

    def test_advance_eta_requires_external_mode(self):
        opt = GmOptimizer(small_ac_net(), GmConfig(variant="f_wgm"), lr=1e-3)
        with pytest.raises(RuntimeError):
            opt.advance_eta()


class TestMaskMomentum:
    def test_mzeta_recursion_against_hand_values(self):
        net = spread_net()
        cfg = GmConfig(variant="m_wgm", lam=0.5, zeta=0.9, momentum_init=1.0)
        opt = GmOptimizer(net, cfg, lr=1e-2)
        metrics = opt.step(constant_grads(net, 1.0))
        mzeta = np.asarray(opt.state_dict()["params"]["out/0:weight"]["mzeta"])
        # kept entry: 1*0.9 + 1*0.1; dropped entry: 1*0.9 + 0*0.1
        np.testing.assert_allclose(mzeta, [[1.0, 0.9]], rtol=1e-12)
        assert abs(metrics["active_pct"] - 95.0) < 1e-9

        opt.step(constant_grads(net, 1.0))
        mzeta = np.asarray(opt.state_dict()["params"]["out/0:weight"]["mzeta"])
        np.testing.assert_allclose(mzeta, [[1.0, 0.81]], rtol=1e-12)

        for _ in range(3):
            opt.step(constant_grads(net, 1.0))
        mzeta = np.asarray(opt.state_dict()["params"]["out/0:weight"]["mzeta"])
        np.testing.assert_allclose(mzeta, [[1.0, 0.9 ** 5]], rtol=1e-12)

    def test_soft_mask_attenuates_the_descent(self):
        net = spread_net()
        w_before = net.get_layer("out/0").W.copy()
        cfg = GmConfig(variant="m_wgm", lam=0.5, zeta=0.9, momentum_init=1.0)
        opt = GmOptimizer(net, cfg, lr=1e-2)
        opt.step(constant_grads(net, 1.0))
        delta = w_before - net.get_layer("out/0").W
        # identical directions, so the masked entry moves 0.9 times as far
        assert np.isclose(delta[0, 1], 0.9 * delta[0, 0], rtol=1e-5)

    def test_biases_not_masked_by_default(self):
        net = spread_net()
        cfg = GmConfig(variant="m_wgm", lam=0.5, zeta=0.5, momentum_init=1.0)
        opt = GmOptimizer(net, cfg, lr=1e-2)
        opt.step(constant_grads(net, 1.0))
        assert opt.state_dict()["params"]["out/0:bias"]["mzeta"] is None


class TestRewardAdaptation:
    def controller(self, lam=0.5, alpha=0.05, start=2, repeat=2):
        cfg = GmConfig(variant="am_wgm", lam=lam, alpha_lam=alpha,
                       eta_start=start, eta_repeat=repeat)
        return GmOptimizer(small_ac_net(), cfg, lr=1e-3, eta_external=True)

    def test_scripted_adaptation_sequence(self):
        opt = self.controller()
        # (window fed before the event, lam expected right after the event)
        script = [
            ([0.5, 1.5], 0.5),    # first event only primes the reference
            ([2.0], 0.45),        # phi 2.0 >= 1.0: improved
            ([3.0], 0.5),         # phi 1.5 < 2.0: worse
            ([4.8], 0.45),        # phi 1.6 >= 1.5: improved
            ([-1.0], 0.5),        # phi negative < 1.6: worse
            ([-0.5], 0.45),       # guard: -0.5 >= -1.0: improved
            ([-2.0], 0.5),        # guard: -2.0 < -0.5: worse
            ([5.0], 0.45),        # guard: 5.0 >= -2.0: improved
            ([5.0], 0.40),        # back to ratios: phi 1.0 >= 1.0 (guard reset)
        ]
        prev = 0.5
        for window, expected in script:
            opt.observe_rewards(window)
            opt.advance_eta()
            # odd eta, between events: nothing may move yet
            assert opt.lam == pytest.approx(prev, abs=1e-9)
            opt.advance_eta()
            assert opt.lam == pytest.approx(expected, abs=1e-9)
            prev = expected

    def test_empty_window_skips_the_event(self):
        opt = self.controller()
        opt.observe_rewards([1.0])
        opt.advance_eta()
        opt.advance_eta()  # primes with 1.0
        opt.observe_rewards([2.0])
        opt.advance_eta()
        opt.advance_eta()  # adapts: improved
        assert opt.lam == pytest.approx(0.45, abs=1e-9)
        opt.advance_eta()
        opt.advance_eta()  # no rewards since: event must be a no-op
        assert opt.lam == pytest.approx(0.45, abs=1e-9)

    def test_lam_clamped_to_unit_interval(self):
        opt = self.controller(lam=0.02, start=1, repeat=1)
        opt.observe_rewards([1.0])
        opt.advance_eta()  # prime
        opt.observe_rewards([2.0])
        opt.advance_eta()
        assert opt.lam == 0.0
        opt.observe_rewards([4.0])
        opt.advance_eta()  # improved again: stays at the floor
        assert opt.lam == 0.0

        opt = self.controller(lam=0.97, start=1, repeat=1)
        opt.observe_rewards([2.0])
        opt.advance_eta()  # prime
        opt.observe_rewards([1.0])
        opt.advance_eta()  # worse
        assert opt.lam == 1.0
        opt.observe_rewards([0.25])
        opt.advance_eta()  # worse again: stays at the cap
        assert opt.lam == 1.0

    def test_internal_eta_adapts_during_steps(self):
        net = small_ac_net(seed=5)
        cfg = GmConfig(variant="am_wgm", lam=0.5, alpha_lam=0.05,
                       eta_start=1, eta_repeat=1)
        opt = GmOptimizer(net, cfg, lr=1e-3)
        gen = np.random.default_rng(2)
        opt.observe_rewards([1.0])
        opt.step(random_grads(net, gen))   # eta 1 primes
        assert opt.lam == 0.5
        opt.observe_rewards([2.0])
        opt.step(random_grads(net, gen))   # eta 2 adapts
        assert opt.lam == pytest.approx(0.45, abs=1e-9)

    def test_other_variants_never_adapt(self):
        cfg = GmConfig(variant="m_wgm", lam=0.5, eta_start=1, eta_repeat=1)
        opt = GmOptimizer(small_ac_net(), cfg, lr=1e-3, eta_external=True)
        opt.observe_rewards([1.0])
        for _ in range(4):
            opt.advance_eta()
        assert opt.lam == 0.5

    def test_window_mean_helper(self):
        assert episode_reward_mean([1.0, 2.0, 3.0]) == 2.0
        assert episode_reward_mean(iter([-4.0, 4.0])) == 0.0
        with pytest.raises(ValueError):
            episode_reward_mean([])


class TestStepBookkeeping:
    def test_abs_grad_sum_counts_weights_only(self):
        net = spread_net()
        opt = GmOptimizer(net, GmConfig(variant="wogm"), lr=1e-3)
        g = GradientSet.zeros_like(net)
        g.weights["out/0"][...] = np.array([[1.0, -1.0]])
        g.biases["out/0"][...] = 1e6
        metrics = opt.step(g)
        # two weight entries with unit-magnitude directions; biases excluded
        assert abs(metrics["abs_grad_sum"] - 2.0) < 1e-6

    def test_wogm_reports_full_activity(self):
        net = small_ac_net(seed=6)
        opt = GmOptimizer(net, GmConfig(variant="wogm"), lr=1e-3)
        m = opt.step(constant_grads(net, 0.5))
        assert m["active_pct"] == 100.0 and m["lam"] == 0.5

    def test_metrics_mirror_last_step(self):
        net = small_ac_net(seed=7)
        opt = GmOptimizer(net, GmConfig(variant="wogm"), lr=1e-3)
        returned = opt.step(constant_grads(net, 0.5))
        assert opt.metrics() == returned

    def test_non_finite_gradient_raises(self):
        net = small_ac_net(seed=8)
        opt = GmOptimizer(net, GmConfig(variant="wogm"), lr=1e-3)
        bad = constant_grads(net, 1.0)
        bad.weights["trunk/0"][0, 0] = np.inf
        with pytest.raises(FloatingPointError):
            opt.step(bad)

    def test_missing_extra_gradient_raises(self):
        net = small_ac_net(seed=9)
        extra = {"log_std": np.zeros(2)}
        opt = GmOptimizer(net, GmConfig(variant="wogm"), lr=1e-3,
                          extra_params=extra)
        with pytest.raises(KeyError):
            opt.step(constant_grads(net, 1.0))


class TestStateRoundtrip:
    def continuation(self, variant, **cfg_kwargs):
        cfg = GmConfig(variant=variant, eta_start=2, eta_repeat=2,
                       alpha_lam=0.05, **cfg_kwargs)
        net = small_ac_net(seed=21)
        opt = GmOptimizer(net, cfg, lr=2e-3)
        gen = np.random.default_rng(33)
        for _ in range(7):
            opt.observe_rewards([float(gen.normal())])
            opt.step(random_grads(net, gen))

        net_snapshot = net.state_dict()
        opt_snapshot = opt.state_dict()
        tail = [random_grads(net, np.random.default_rng(100 + i)) for i in range(5)]

        for g in tail:
            opt.observe_rewards([1.0])
            opt.step(g)
        straight = param_arrays(net)
        straight_metrics = opt.metrics()

        net2 = small_ac_net(seed=99)
        net2.load_state_dict(net_snapshot)
        opt2 = GmOptimizer(net2, cfg, lr=2e-3)
        opt2.load_state_dict(opt_snapshot)
        for g in tail:
            opt2.observe_rewards([1.0])
            opt2.step(g)
        resumed = param_arrays(net2)

        for key in straight:
            assert np.array_equal(straight[key], resumed[key]), key
        assert opt2.metrics() == straight_metrics
        assert opt2.lam == opt.lam and opt2.eta == opt.eta

    def test_am_wgm_roundtrip_resumes_bitwise(self):
        self.continuation("am_wgm", lam=0.5, zeta=0.9)

    def test_f_wgm_roundtrip_keeps_frozen_mask(self):
        self.continuation("f_wgm", lam=0.5)

    def test_u_wgm_roundtrip_keeps_halved_lam(self):
        self.continuation("u_wgm", lam=0.5)
