import itertools

import numpy as np
import pytest

from mdpgeom import (
    NotPrimitiveError,
    NotUnichainError,
    classify_chain,
    primitivity_certificate,
    stationary_distribution,
    unichain_by_invertibility,
)

from conftest import random_stochastic


def deterministic_kernels(n):
    """All n^n deterministic transition functions as 0/1 kernels."""
    for image in itertools.product(range(n), repeat=n):
        p = np.zeros((n, n))
        for i, j in enumerate(image):
            p[i, j] = 1.0
        yield p


class TestClassifyChain:
    def test_identity_two_absorbing(self):
        cls = classify_chain(np.eye(2))
        assert cls.closed_class_count == 2
        assert not cls.is_unichain
        assert cls.transient_states == frozenset()

    def test_swap_cycle(self):
        cls = classify_chain(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert cls.closed_class_count == 1
        assert cls.is_unichain
        assert cls.transient_states == frozenset()

    def test_absorbing_plus_feeder(self):
        cls = classify_chain(np.array([[1.0, 0.0], [1.0, 0.0]]))
        assert cls.is_unichain
        assert cls.closed_class_count == 1
        assert cls.transient_states == frozenset({1})

    def test_two_blocks(self):
        p = np.zeros((4, 4))
        p[0, 1] = p[1, 0] = 1.0
        p[2, 3] = p[3, 2] = 1.0
        cls = classify_chain(p)
        assert cls.closed_class_count == 2
        assert not cls.is_unichain

    def test_transient_chain_into_cycle(self):
        # 3 -> 2 -> cycle{0,1}
        p = np.array(
            [
                [0.0, 1.0, 0.0, 0.0],
                [1.0, 0.0, 0.0, 0.0],
                [0.5, 0.5, 0.0, 0.0],
                [0.0, 0.0, 1.0, 0.0],
            ]
        )
        cls = classify_chain(p)
        assert cls.is_unichain
        assert cls.transient_states == frozenset({2, 3})

    def test_rejects_non_stochastic(self):
        with pytest.raises(ValueError):
            classify_chain(np.array([[0.5, 0.6], [1.0, 0.0]]))
        with pytest.raises(ValueError):
            classify_chain(np.array([[1.5, -0.5], [0.0, 1.0]]))
        with pytest.raises(ValueError):
            classify_chain(np.ones((2, 3)))


class TestUnichainByInvertibility:
    def test_identity_singular(self):
        # I + E - I = E has rank 1
        assert unichain_by_invertibility(np.eye(2)) is False

    def test_swap_invertible(self):
        # I + E - P = [[2, 0], [0, 2]], determinant 4
        assert unichain_by_invertibility(np.array([[0.0, 1.0], [1.0, 0.0]])) is True

    def test_single_state(self):
        assert unichain_by_invertibility(np.array([[1.0]])) is True

    def test_agrees_with_classification_exhaustively(self):
        # all deterministic kernels for n = 2 and n = 3
        for n in (2, 3):
            for p in deterministic_kernels(n):
                assert classify_chain(p).is_unichain == unichain_by_invertibility(p)

    def test_agrees_on_random_kernels(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            n = int(rng.integers(2, 7))
            p = random_stochastic(rng, n, sparsity=float(rng.uniform(0, 0.8)))
            assert classify_chain(p).is_unichain == unichain_by_invertibility(p)


class TestPrimitivityCertificate:
    def test_uniform_kernel(self):
        for n in (2, 4):
            cert = primitivity_certificate(np.full((n, n), 1.0 / n))
            assert cert.exponent == 1
            assert cert.omega == pytest.approx(1.0 / n)

    def test_swap_is_periodic(self):
        with pytest.raises(NotPrimitiveError):
            primitivity_certificate(np.array([[0.0, 1.0], [1.0, 0.0]]))

    def test_two_state_example(self):
        p = np.array([[0.5, 0.5], [1.0, 0.0]])
        cert = primitivity_certificate(p)
        # P^2 = [[0.75, 0.25], [0.5, 0.5]]
        assert cert.exponent == 2
        assert cert.omega == pytest.approx(0.25)

    def test_minimality_and_bound(self):
        rng = np.random.default_rng(11)
        for _ in range(60):
            n = int(rng.integers(2, 6))
            p = random_stochastic(rng, n, sparsity=float(rng.uniform(0, 0.6)))
            try:
                cert = primitivity_certificate(p)
            except NotPrimitiveError:
                continue
            assert cert.exponent <= n * n - 2 * n + 2
            power = np.linalg.matrix_power(p, cert.exponent)
            assert np.all(power >= cert.omega - 1e-15)
            if cert.exponent > 1:
                below = np.linalg.matrix_power(p, cert.exponent - 1)
                assert np.any(below == 0.0)

    def test_reducible_not_primitive(self):
        # absorbing state with an unreachable column stays zero forever
        with pytest.raises(NotPrimitiveError):
            primitivity_certificate(np.array([[1.0, 0.0], [1.0, 0.0]]))


class TestStationaryDistribution:
    def test_swap(self):
        mu = stationary_distribution(np.array([[0.0, 1.0], [1.0, 0.0]]))
        np.testing.assert_allclose(mu, [0.5, 0.5], atol=1e-12)

    def test_absorbing(self):
        mu = stationary_distribution(np.array([[1.0, 0.0], [1.0, 0.0]]))
        np.testing.assert_allclose(mu, [1.0, 0.0], atol=1e-12)

    def test_two_thirds(self):
        # balance: mu0 = 0.5 mu0 + mu1, normalized
        mu = stationary_distribution(np.array([[0.5, 0.5], [1.0, 0.0]]))
        np.testing.assert_allclose(mu, [2.0 / 3.0, 1.0 / 3.0], atol=1e-12)

    def test_multichain_rejected(self):
        with pytest.raises(NotUnichainError):
            stationary_distribution(np.eye(2))

    def test_fixed_point_residual(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = int(rng.integers(2, 7))
            p = random_stochastic(rng, n)
            mu = stationary_distribution(p)
            assert np.max(np.abs(mu @ p - mu)) <= 1e-10
            assert mu.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(mu >= 0.0)
