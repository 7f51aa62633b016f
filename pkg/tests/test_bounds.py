"""Sandwich bounds around the joint rate and side-information decomposition."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semrd import (
    DistortionSpec,
    InvalidStateError,
    binary_entropy,
    lemma1_bounds,
    lemma2_check,
    make_net,
    random_net,
)
from semrd.nets import doubly_symmetric_fork

TWO_SIDED_RATE = 0.36519727294664994  # 2 * (h_b(0.1) - h_b(0.05))


def test_bounds_fork_asymmetric_targets(fork_net):
    rep = lemma1_bounds(fork_net, (0.1, 0.05, 0.2))
    assert rep.converged
    assert rep.targets == (0.1, 0.05, 0.2)
    assert rep.lower - 2e-4 <= rep.joint <= rep.upper + 2e-4
    assert rep.slack_lower == pytest.approx(rep.joint - rep.lower, abs=1e-12)
    assert rep.slack_upper == pytest.approx(rep.upper - rep.joint, abs=1e-12)
    assert sum(rep.lower_terms) == pytest.approx(rep.lower, abs=1e-12)
    assert sum(rep.upper_terms) == pytest.approx(rep.upper, abs=1e-12)
    # dependence strictly separates the three quantities on this net
    assert rep.joint > rep.lower + 0.01
    assert rep.upper > rep.joint + 0.5


def test_bounds_collapse_for_independent_variables():
    net = make_net(
        [("A", 2), ("B", 2)],
        [("A", [], [[0.5, 0.5]]), ("B", [], [[0.5, 0.5]])],
    )
    rep = lemma1_bounds(net, (0.1, 0.1))
    assert rep.converged
    assert rep.joint == pytest.approx(rep.lower, abs=2e-4)
    assert rep.joint == pytest.approx(rep.upper, abs=2e-4)
    assert rep.joint == pytest.approx(2 * (1 - binary_entropy(0.1)), abs=2e-4)


def test_bounds_copies_pin_joint_to_lower():
    # all three variables are literal copies of one fair bit
    net = doubly_symmetric_fork(0.0, 0.0)
    rep = lemma1_bounds(net, (0.1, 0.1, 0.1))
    assert rep.converged
    one = 1 - binary_entropy(0.1)
    assert rep.lower == pytest.approx(one, abs=2e-4)
    assert rep.joint == pytest.approx(one, abs=2e-4)
    assert rep.upper == pytest.approx(3 * one, abs=6e-4)


def test_bounds_target_length_checked(fork_net):
    with pytest.raises(InvalidStateError):
        lemma1_bounds(fork_net, (0.1, 0.1))


def test_bounds_with_squared_error(scene_net):
    spec = DistortionSpec.squared_error(scene_net.cards)
    rep = lemma1_bounds(scene_net, (0.2, 0.3, 0.2, 0.2), dspec=spec)
    if rep.converged:
        assert rep.lower - 2e-4 <= rep.joint <= rep.upper + 2e-4


def test_decomposition_fork_reference(fork_net):
    rep = lemma2_check(fork_net, ["Y"], (0.05, 0.05))
    assert rep.converged
    assert rep.partition.side == (0,)
    assert rep.partition.blocks == ((1,), (2,))
    assert rep.joint_conditional == pytest.approx(TWO_SIDED_RATE, abs=2e-4)
    assert rep.subset_sum == pytest.approx(TWO_SIDED_RATE, abs=2e-4)
    assert abs(rep.delta) <= 2e-4
    assert len(rep.block_rates) == 2
    assert sum(rep.block_rates) == pytest.approx(rep.subset_sum, abs=1e-12)


def test_decomposition_chain_reference(chain_net):
    rep = lemma2_check(chain_net, ["Y"], (0.05, 0.05))
    assert rep.converged
    assert rep.partition.blocks == ((0,), (2,))
    assert rep.joint_conditional == pytest.approx(TWO_SIDED_RATE, abs=2e-4)
    assert abs(rep.delta) <= 2e-4


def test_decomposition_asymmetric_noise():
    net = doubly_symmetric_fork(0.1, 0.2)
    rep = lemma2_check(net, ["Y"], (0.05, 0.05))
    want = (binary_entropy(0.1) - binary_entropy(0.05)) + (
        binary_entropy(0.2) - binary_entropy(0.05)
    )
    assert rep.converged
    assert rep.joint_conditional == pytest.approx(want, abs=2e-4)
    assert abs(rep.delta) <= 2e-4


def test_decomposition_single_block_when_side_does_not_split(chain_net):
    # revealing an end of the chain leaves the other two variables coupled
    rep = lemma2_check(chain_net, ["X1"], (0.1, 0.1))
    assert rep.partition.blocks == ((1, 2),)
    assert len(rep.block_rates) == 1
    assert abs(rep.delta) <= 2e-4


def test_decomposition_rejects_unknown_side(fork_net):
    with pytest.raises(InvalidStateError):
        lemma2_check(fork_net, ["nope"], (0.05, 0.05))


@settings(max_examples=8, deadline=None)
@given(seed=st.integers(min_value=0, max_value=5_000))
def test_sandwich_holds_on_random_nets(seed):
    rng = np.random.default_rng(seed)
    net = random_net(seed, int(rng.integers(2, 4)), max_card=3)
    targets = tuple(float(t) for t in rng.uniform(0.05, 0.4, size=net.m))
    rep = lemma1_bounds(net, targets)
    if rep.converged:
        assert rep.lower - 2e-4 <= rep.joint <= rep.upper + 2e-4
