"""Shared model builders for the test suite."""

import numpy as np
import pytest

from mdpgeom import MdpModel, Policy, Sap
from mdpgeom.generate import GeneratorSpec, generate_model


def make_model(n, gamma, saps):
    """saps as (state, reward, probs) triples."""
    return MdpModel(
        n=n,
        gamma=gamma,
        saps=tuple(Sap(state=s, reward=r, probs=np.asarray(p, dtype=float)) for s, r, p in saps),
    )


@pytest.fixture
def swap_model():
    # gamma=1 two-state cycle: s0 -> s1 with reward 2, s1 -> s0 with reward 0
    return make_model(2, 1.0, [(0, 2.0, [0, 1]), (1, 0.0, [1, 0])])


@pytest.fixture
def swap_plus_selfloop():
    # swap_model plus an inferior self-loop SAP at s0 with reward 0.5
    return make_model(
        2,
        1.0,
        [(0, 2.0, [0, 1]), (1, 0.0, [1, 0]), (0, 0.5, [1, 0])],
    )


@pytest.fixture
def selfloop_model():
    # gamma=0.5, both states absorbing, rewards (1, 0); classical V = (2, 0)
    return make_model(2, 0.5, [(0, 1.0, [1, 0]), (1, 0.0, [0, 1])])


@pytest.fixture
def swap_policy():
    return Policy([0, 1])


def random_instance(seed, n, gamma, saps_per_state=2, sparsity=0.0, reward_range=(-1.0, 1.0)):
    spec = GeneratorSpec(
        n=n,
        saps_per_state=saps_per_state,
        gamma=gamma,
        reward_range=reward_range,
        sparsity=sparsity,
        seed=seed,
    )
    return generate_model(spec).model


def random_stochastic(rng, n, sparsity=0.0):
    """Random row-stochastic matrix; sparsity zeroes entries but keeps rows alive."""
    w = rng.random((n, n))
    if sparsity > 0.0:
        mask = rng.random((n, n)) >= sparsity
        w = np.where(mask, w, 0.0)
        for i in range(n):
            if not w[i].any():
                w[i, rng.integers(n)] = 1.0
    return w / w.sum(axis=1, keepdims=True)
