"""Exact kernels on small discrete spaces."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phsmc.finite import (
    DiscreteTarget,
    MatrixProposal,
    mh_kernel_matrix,
    phs_joint_kernel,
    product_measure,
    pt_joint_kernel,
    stationary_distribution,
)

log_masses = st.integers(2, 6).flatmap(
    lambda n: st.lists(st.floats(-5, 5, allow_nan=False), min_size=n, max_size=n)
)


def _proposal(n, seed, symmetric):
    rng = np.random.default_rng(seed)
    q = rng.uniform(0.1, 1.0, (n, n))
    if symmetric:
        q = q + q.T
    np.fill_diagonal(q, 0.0)
    return q / q.sum(axis=1, keepdims=True)


@settings(max_examples=60, deadline=None)
@given(log_masses, st.integers(0, 10_000), st.booleans())
def test_mh_detailed_balance(lm, seed, symmetric):
    f = DiscreteTarget(lm).probabilities()
    k = mh_kernel_matrix(lm, _proposal(len(lm), seed, symmetric))
    flux = f[:, None] * k
    assert np.allclose(k.sum(axis=1), 1.0, atol=1e-12)
    assert np.max(np.abs(flux - flux.T)) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4).flatmap(lambda n: st.lists(st.floats(-3, 3), min_size=n, max_size=n)), st.integers(0, 999))
def test_phs_product_measure_invariant(lm, seed):
    f = DiscreteTarget(lm).probabilities()
    k = phs_joint_kernel(lm, _proposal(len(lm), seed, False), 3)
    mu = product_measure([f] * 3)
    assert np.max(np.abs(mu @ k - mu)) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(log_masses, st.integers(0, 999), st.floats(0.05, 0.95))
def test_pt_marginals(lm, seed, s):
    tgt = DiscreteTarget(lm)
    k = pt_joint_kernel(lm, _proposal(len(lm), seed, False), (1.0, 2.0), s)
    pi = stationary_distribution(k)
    n = len(lm)
    joint = pi.reshape(n, n)
    assert np.max(np.abs(joint.sum(axis=1) - tgt.probabilities(1.0))) <= 1e-10
    assert np.max(np.abs(joint.sum(axis=0) - tgt.probabilities(2.0))) <= 1e-10


def test_phs_chain_one_marginal_is_target():
    lm = [0.0, 1.0, -1.0]
    k = phs_joint_kernel(lm, _proposal(3, 1, True), 4)
    pi = stationary_distribution(k).reshape(3, 3, 3, 3)
    f = DiscreteTarget(lm).probabilities()
    assert np.allclose(pi.sum(axis=(1, 2, 3)), f, atol=1e-10)


def test_matrix_proposal_checks():
    with pytest.raises(ValueError):
        MatrixProposal([[0.5, 0.5], [1.0, 0.0]])
    with pytest.raises(ValueError):
        MatrixProposal([[0.0, 0.7], [1.0, 0.0]])
    assert MatrixProposal([[0.0, 1.0], [1.0, 0.0]]).symmetric


def test_phs_needs_three_chains():
    with pytest.raises(ValueError):
        phs_joint_kernel([0.0, 0.0], _proposal(2, 0, True), 2)
