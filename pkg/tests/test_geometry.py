import numpy as np
import pytest

from mdpgeom import (
    CriterionMismatchError,
    NotUnichainError,
    Policy,
    action_vector,
    advantage,
    advantages,
    bias,
    classify_chain,
    enumerate_policies,
    evaluate_average,
    evaluate_discounted,
    evaluate_policy,
    gain,
    mdp_constant,
    normalize_rewards,
    policy_kernel,
    policy_rewards,
    stationary_distribution,
    to_classical_values,
)

from conftest import make_model, random_instance


class TestActionVector:
    def test_swap_sap(self, swap_model):
        # n=2, gamma=1, C=2: SAP at s0 with probs (0, 1), reward 2
        av = action_vector(swap_model, 0)
        assert av.height == 2.0
        np.testing.assert_allclose(av.coeffs, [-1.0, 0.0], atol=1e-15)

    def test_selfloop_sap(self):
        m = make_model(2, 1.0, [(0, 0.0, [1, 0]), (1, 0.0, [1, 0])])
        av = action_vector(m, 0)
        # own-state coordinate (1*(1-1) - 1)/2, other (1*0 - 1)/2
        np.testing.assert_allclose(av.coeffs, [-0.5, -0.5], atol=1e-15)
        assert av.height == 0.0

    @pytest.mark.parametrize("gamma", [0.3, 0.5, 0.9, 1.0])
    def test_coefficient_sum_is_minus_one(self, gamma):
        for seed in range(5):
            m = random_instance(seed, n=4, gamma=gamma, saps_per_state=3, sparsity=0.3)
            for a in range(m.m):
                av = action_vector(m, a)
                assert abs(av.coeffs.sum() + 1.0) <= 1e-12

    def test_constant_c(self):
        assert mdp_constant(make_model(2, 1.0, [(0, 0, [0, 1]), (1, 0, [1, 0])])) == 2.0
        assert mdp_constant(make_model(2, 0.5, [(0, 0, [0, 1]), (1, 0, [1, 0])])) == 1.5
        # single state: C = gamma + (1 - gamma) = 1 at any gamma
        assert mdp_constant(make_model(1, 0.3, [(0, 0, [1.0])])) == 1.0


class TestEvaluatePolicy:
    def test_swap_average(self, swap_model, swap_policy):
        pv, consts = evaluate_policy(swap_model, swap_policy)
        np.testing.assert_allclose(pv.values, [2.0, 0.0], atol=1e-12)
        assert consts.C == 2.0
        assert consts.v_sigma == pytest.approx(2.0, abs=1e-12)
        assert pv.lead == 1.0

    def test_selfloops_discounted(self, selfloop_model):
        pv, consts = evaluate_policy(selfloop_model, Policy([0, 1]))
        np.testing.assert_allclose(pv.values, [2.0, -1.0], atol=1e-12)
        assert consts.C == 1.5
        assert consts.v_sigma == pytest.approx(1.0, abs=1e-12)

    def test_identity_kernel_not_unichain(self):
        m = make_model(2, 1.0, [(0, 1.0, [1, 0]), (1, 0.0, [0, 1])])
        with pytest.raises(NotUnichainError):
            evaluate_policy(m, Policy([0, 1]))

    def test_defining_equation_residual(self):
        # (I + gamma E - gamma P)(v / C) = R must hold to solver accuracy
        for seed, gamma in [(0, 0.4), (1, 0.95), (2, 1.0)]:
            m = random_instance(seed, n=5, gamma=gamma, saps_per_state=2)
            pi = next(iter(enumerate_policies(m)))
            pv, consts = evaluate_policy(m, pi)
            n = m.n
            a = np.eye(n) + gamma * np.ones((n, n)) - gamma * policy_kernel(m, pi)
            r = policy_rewards(m, pi)
            assert np.max(np.abs(a @ (pv.values / consts.C) - r)) <= 1e-10 * (1 + np.max(np.abs(r)))


class TestAdvantage:
    def test_own_sap_is_zero(self, swap_plus_selfloop):
        pv, _ = evaluate_policy(swap_plus_selfloop, Policy([0, 1]))
        assert advantage(swap_plus_selfloop, 0, pv) == pytest.approx(0.0, abs=1e-12)
        assert advantage(swap_plus_selfloop, 1, pv) == pytest.approx(0.0, abs=1e-12)

    def test_selfloop_deviation(self, swap_plus_selfloop):
        # r - rho + p.h - h(s0) with h = (1, 0), rho = 1: 0.5 - 1 + 1 - 1
        pv, _ = evaluate_policy(swap_plus_selfloop, Policy([0, 1]))
        assert advantage(swap_plus_selfloop, 2, pv) == pytest.approx(-0.5, abs=1e-12)

    def test_cross_sap_discounted(self):
        # gamma=0.5 self-loop model plus SAP at s1 jumping to s0 with r=0:
        # classical advantage r + gamma p.V - V(s1) = 0.5 * 2 - 0 = 1
        m = make_model(
            2, 0.5, [(0, 1.0, [1, 0]), (1, 0.0, [0, 1]), (1, 0.0, [1, 0])]
        )
        pv, _ = evaluate_policy(m, Policy([0, 1]))
        assert advantage(m, 2, pv) == pytest.approx(1.0, abs=1e-12)

    def test_dimension_mismatch(self, swap_model):
        from mdpgeom.geometry import PolicyVector

        with pytest.raises(ValueError):
            advantage(swap_model, 0, PolicyVector(values=np.zeros(3)))

    def test_vectorized_matches_scalar(self):
        m = random_instance(3, n=4, gamma=0.7, saps_per_state=3)
        pi = next(iter(enumerate_policies(m)))
        pv, _ = evaluate_policy(m, pi)
        all_adv = advantages(m, pv)
        for a in range(m.m):
            assert all_adv[a] == pytest.approx(advantage(m, a, pv), abs=1e-12)


class TestClassicalFromNew:
    def test_selfloop_example(self, selfloop_model):
        pv, consts = evaluate_policy(selfloop_model, Policy([0, 1]))
        vv = to_classical_values(pv, consts, selfloop_model)
        np.testing.assert_allclose(vv.values, [2.0, 0.0], atol=1e-12)

    def test_zero_sigma_reduces_to_scaled(self):
        # antisymmetric rewards on two self-loops: V = (1, -1), sum 0, so v/C = V
        m = make_model(2, 0.5, [(0, 0.5, [1, 0]), (1, -0.5, [0, 1])])
        pv, consts = evaluate_policy(m, Policy([0, 1]))
        assert consts.v_sigma == pytest.approx(0.0, abs=1e-12)
        vv = to_classical_values(pv, consts, m)
        np.testing.assert_allclose(vv.values, pv.values / consts.C, atol=1e-12)

    def test_rejects_average(self, swap_model, swap_policy):
        pv, consts = evaluate_policy(swap_model, swap_policy)
        with pytest.raises(CriterionMismatchError):
            to_classical_values(pv, consts, swap_model)

    @pytest.mark.parametrize("gamma", [0.3, 0.9])
    def test_sum_relation(self, gamma):
        # (1 - gamma) * sum(V) = v_sigma
        for seed in range(10):
            m = random_instance(seed, n=4, gamma=gamma, saps_per_state=2)
            for pi in enumerate_policies(m):
                pv, consts = evaluate_policy(m, pi)
                v_classical = evaluate_discounted(m, pi).values
                assert (1 - gamma) * v_classical.sum() == pytest.approx(
                    consts.v_sigma, abs=1e-9 * (1 + abs(consts.v_sigma))
                )

    @pytest.mark.parametrize("gamma", [0.3, 0.9])
    def test_mean_deviation_relation(self, gamma):
        # V(s) - mean(V) = (v(s) - mean(v)) / C
        for seed in range(10):
            m = random_instance(seed + 50, n=5, gamma=gamma, saps_per_state=2)
            pi = next(iter(enumerate_policies(m)))
            pv, consts = evaluate_policy(m, pi)
            v_classical = evaluate_discounted(m, pi).values
            lhs = v_classical - v_classical.mean()
            rhs = (pv.values - pv.values.mean()) / consts.C
            np.testing.assert_allclose(lhs, rhs, atol=1e-9)


class TestGainAndBias:
    def test_gain_examples(self, swap_model, swap_policy):
        _, consts = evaluate_policy(swap_model, swap_policy)
        assert gain(consts) == pytest.approx(1.0, abs=1e-12)

        zero = make_model(2, 1.0, [(0, 0.0, [0, 1]), (1, 0.0, [1, 0])])
        _, c0 = evaluate_policy(zero, Policy([0, 1]))
        assert gain(c0) == pytest.approx(0.0, abs=1e-12)

        single = make_model(1, 1.0, [(0, 3.0, [1.0])])
        _, c1 = evaluate_policy(single, Policy([0]))
        assert gain(c1) == pytest.approx(3.0, abs=1e-12)

    def test_gain_rejects_discounted(self, selfloop_model):
        _, consts = evaluate_policy(selfloop_model, Policy([0, 1]))
        with pytest.raises(CriterionMismatchError):
            gain(consts)

    def test_bias_anchoring(self, swap_model, swap_policy):
        pv, consts = evaluate_policy(swap_model, swap_policy)
        np.testing.assert_allclose(bias(pv, consts, 1).values, [1.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(bias(pv, consts, 0).values, [0.0, -1.0], atol=1e-12)

    def test_bias_constant_values(self):
        m = make_model(2, 1.0, [(0, 1.0, [0, 1]), (1, 1.0, [1, 0])])
        pv, consts = evaluate_policy(m, Policy([0, 1]))
        np.testing.assert_allclose(bias(pv, consts, 0).values, [0.0, 0.0], atol=1e-12)

    def test_bias_bellman_identity(self):
        # T(v/C) = v/C + rho * 1 at gamma = 1
        for seed in range(10):
            m = random_instance(seed + 100, n=4, gamma=1.0, saps_per_state=2)
            for pi in enumerate_policies(m):
                p = policy_kernel(m, pi)
                if not classify_chain(p).is_unichain:
                    continue
                pv, consts = evaluate_policy(m, pi)
                h = pv.values / consts.C
                r = policy_rewards(m, pi)
                np.testing.assert_allclose(r + p @ h, h + gain(consts), atol=1e-9)

    def test_gain_matches_stationary(self):
        for seed in range(10):
            m = random_instance(seed + 200, n=5, gamma=1.0, saps_per_state=2)
            pi = next(iter(enumerate_policies(m)))
            p = policy_kernel(m, pi)
            if not classify_chain(p).is_unichain:
                continue
            _, consts = evaluate_policy(m, pi)
            mu = stationary_distribution(p)
            assert gain(consts) == pytest.approx(
                float(mu @ policy_rewards(m, pi)), abs=1e-9
            )


class TestAdvantageIdentities:
    @pytest.mark.parametrize("gamma", [0.3, 0.9])
    def test_matches_classical_oracle_discounted(self, gamma):
        for seed in range(10):
            m = random_instance(seed + 300, n=3, gamma=gamma, saps_per_state=2)
            for pi in enumerate_policies(m):
                pv, _ = evaluate_policy(m, pi)
                v = evaluate_discounted(m, pi).values
                oracle = (
                    m.sap_rewards + gamma * (m.sap_probs @ v) - v[m.sap_states]
                )
                np.testing.assert_allclose(advantages(m, pv), oracle, atol=1e-9)

    def test_matches_classical_oracle_average(self):
        for seed in range(10):
            m = random_instance(seed + 400, n=3, gamma=1.0, saps_per_state=2)
            for pi in enumerate_policies(m):
                if not classify_chain(policy_kernel(m, pi)).is_unichain:
                    continue
                pv, _ = evaluate_policy(m, pi)
                gb = evaluate_average(m, pi)
                oracle = (
                    m.sap_rewards
                    - gb.gain
                    + m.sap_probs @ gb.bias
                    - gb.bias[m.sap_states]
                )
                np.testing.assert_allclose(advantages(m, pv), oracle, atol=1e-9)


class TestNormalize:
    def test_member_rewards_zero(self, swap_plus_selfloop):
        norm = normalize_rewards(swap_plus_selfloop, Policy([0, 1]))
        assert abs(norm.saps[0].reward) <= 1e-10
        assert abs(norm.saps[1].reward) <= 1e-10
        assert norm.saps[2].reward == pytest.approx(-0.5, abs=1e-12)

    def test_structure_preserved(self, swap_plus_selfloop):
        norm = normalize_rewards(swap_plus_selfloop, Policy([0, 1]))
        assert norm.n == swap_plus_selfloop.n
        assert norm.gamma == swap_plus_selfloop.gamma
        for old, new in zip(swap_plus_selfloop.saps, norm.saps):
            assert old.state == new.state
            assert np.array_equal(old.probs, new.probs)

    def test_idempotent(self, swap_plus_selfloop):
        pi = Policy([0, 1])
        once = normalize_rewards(swap_plus_selfloop, pi)
        twice = normalize_rewards(once, pi)
        for a, b in zip(once.saps, twice.saps):
            assert b.reward == pytest.approx(a.reward, abs=1e-10)

    def test_advantages_preserved_across_policies(self):
        m = random_instance(17, n=3, gamma=1.0, saps_per_state=2)
        from mdpgeom import optimal_policy

        star = optimal_policy(m).policy
        norm = normalize_rewards(m, star)
        for pi in enumerate_policies(m):
            if not classify_chain(policy_kernel(m, pi)).is_unichain:
                continue
            pv_orig, _ = evaluate_policy(m, pi)
            pv_norm, _ = evaluate_policy(norm, pi)
            np.testing.assert_allclose(
                advantages(m, pv_orig), advantages(norm, pv_norm), atol=1e-9
            )

    def test_greedy_argmax_preserved(self):
        m = random_instance(23, n=4, gamma=0.8, saps_per_state=3)
        from mdpgeom import optimal_policy

        star = optimal_policy(m).policy
        norm = normalize_rewards(m, star)
        pv_o, _ = evaluate_policy(m, star)
        pv_n, _ = evaluate_policy(norm, star)
        adv_o, adv_n = advantages(m, pv_o), advantages(norm, pv_n)
        for s in range(m.n):
            ids = m.saps_at(s)
            assert ids[np.argmax(adv_o[ids])] == ids[np.argmax(adv_n[ids])]
