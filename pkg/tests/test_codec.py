"""Prefix-code construction, stream round-trips, and codebook cost accounting."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import semrd
from semrd import (
    CorruptStreamError,
    InvalidStateError,
    UncodableSampleError,
    WrongCodebookError,
    build_factorized_codebooks,
    build_joint_huffman,
    complexity_report,
    decode,
    encode,
    entropy_bits,
    enumerate_joint,
    expected_length,
    huffman_code,
    joint_entropy_factorized,
    random_net,
    sample,
)
from semrd.nets import binary_chain


def probs(seed, k):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(k))
    return p / p.sum()


def test_huffman_fixed_example():
    code = huffman_code([0.4, 0.3, 0.2, 0.1])
    assert code.codewords == {0: "0", 1: "10", 3: "110", 2: "111"}
    assert code.expected_length([0.4, 0.3, 0.2, 0.1]) == pytest.approx(1.9, abs=1e-12)
    assert code.kraft_sum() == Fraction(1)


def test_huffman_single_support_row_uses_empty_word():
    assert huffman_code([1.0, 0.0]).codewords == {0: ""}
    assert huffman_code([1.0]).codewords == {0: ""}


def test_huffman_is_deterministic():
    p = probs(7, 9)
    a = huffman_code(p)
    b = huffman_code(p)
    assert a.codewords == b.codewords
    assert list(a.codewords.items()) == list(b.codewords.items())


def test_huffman_uniform_eight():
    code = huffman_code([0.125] * 8)
    assert sorted(code.length(s) for s in range(8)) == [3] * 8


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=10_000),
    k=st.integers(min_value=1, max_value=24),
)
def test_huffman_kraft_and_length_window(seed, k):
    p = probs(seed, k)
    code = huffman_code(p)
    assert code.kraft_sum() == Fraction(1)
    h = entropy_bits(p)
    e = expected_length(code, p)
    assert h - 1e-9 <= e < h + 1.0


def test_huffman_beats_no_shorter_code_on_small_support():
    # exhaustive check against every prefix-free length profile for 3 symbols
    p = [0.5, 0.3, 0.2]
    e = expected_length(huffman_code(p), p)
    assert e == pytest.approx(1.5, abs=1e-12)  # lengths 1, 2, 2 are optimal here


def test_prefix_property_random_rows():
    p = probs(3, 12)
    words = list(huffman_code(p).codewords.values())
    for i, w in enumerate(words):
        for j, u in enumerate(words):
            if i != j:
                assert not u.startswith(w)


def test_factorized_codebook_fork(fork_net):
    fcb = build_factorized_codebooks(fork_net)
    # one code for the root, two per child (one per parent state); the two
    # child rows are distinct distributions so nothing is shared
    assert fcb.n_codes() == 5
    assert fcb.entries_touched == 10
    assert expected_length(fcb, fork_net) == pytest.approx(3.0, abs=1e-12)


def test_joint_huffman_fork(fork_net):
    table = enumerate_joint(fork_net)
    code = build_joint_huffman(table)
    e = expected_length(code, table)
    assert e == pytest.approx(2.04, abs=1e-12)
    h = joint_entropy_factorized(fork_net)
    assert h - 1e-9 <= e < h + 1.0


def test_round_trip_bundled(fork_net, chain_net, scene_net):
    for net in (fork_net, chain_net, scene_net):
        fcb = build_factorized_codebooks(net)
        draws = sample(net, 500, seed=21)
        stream = encode(fcb, draws)
        assert stream.n == 500
        np.testing.assert_array_equal(decode(fcb, stream), draws)


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=10_000),
    n_vars=st.integers(min_value=1, max_value=5),
    n=st.integers(min_value=0, max_value=64),
)
def test_round_trip_random_nets(seed, n_vars, n):
    net = random_net(seed, n_vars, max_card=3)
    fcb = build_factorized_codebooks(net)
    draws = sample(net, n, seed=seed + 1)
    out = decode(fcb, encode(fcb, draws))
    np.testing.assert_array_equal(out, draws)


def test_stream_bytes_round_trip(fork_net):
    fcb = build_factorized_codebooks(fork_net)
    stream = encode(fcb, sample(fork_net, 64, seed=2))
    blob = stream.to_bytes()
    assert blob[:4] == b"BNHC"
    again = semrd.Bitstream.from_bytes(blob)
    assert again.n == stream.n
    assert again.digest == stream.digest
    assert again.payload == stream.payload


def test_encode_rejects_out_of_range_state(fork_net):
    fcb = build_factorized_codebooks(fork_net)
    with pytest.raises(InvalidStateError):
        encode(fcb, [[0, 0, 5]])


def test_encode_rejects_zero_probability_state():
    net = semrd.make_net(
        [("A", 2), ("B", 2)],
        [("A", [], [[1.0, 0.0]]),
         ("B", ["A"], [[0.5, 0.5], [0.5, 0.5]])],
    )
    fcb = build_factorized_codebooks(net)
    with pytest.raises(UncodableSampleError):
        encode(fcb, [[1, 0]])


def test_decode_rejects_other_nets_stream(fork_net, chain_net):
    stream = encode(build_factorized_codebooks(fork_net), sample(fork_net, 10, seed=5))
    with pytest.raises(WrongCodebookError):
        decode(build_factorized_codebooks(chain_net), stream)


def test_decode_rejects_truncated_payload(fork_net):
    fcb = build_factorized_codebooks(fork_net)
    stream = encode(fcb, sample(fork_net, 200, seed=5))
    cut = semrd.Bitstream(stream.n, stream.digest, stream.payload[:-1])
    with pytest.raises(CorruptStreamError):
        decode(fcb, cut)


def test_from_bytes_rejects_bad_magic():
    with pytest.raises(CorruptStreamError):
        semrd.Bitstream.from_bytes(b"oops" + bytes(24))


def test_deterministic_net_encodes_to_zero_bits():
    net = semrd.make_net(
        [("A", 2), ("B", 2)],
        [("A", [], [[1.0, 0.0]]),
         ("B", ["A"], [[1.0, 0.0], [0.0, 1.0]])],
    )
    fcb = build_factorized_codebooks(net)
    stream = encode(fcb, [[0, 0]] * 50)
    assert stream.payload == b""
    np.testing.assert_array_equal(decode(fcb, stream), np.zeros((50, 2), dtype=int))


def test_complexity_report_fork(fork_net):
    rep = complexity_report(fork_net)
    assert rep.n_variables == 3
    assert rep.max_cardinality == 2
    assert rep.max_in_degree == 1
    assert rep.joint_states == 8
    assert rep.factorized_code_bound == 6
    assert rep.factorized_entry_bound == 12
    assert rep.factorized_codes_built == 5
    assert rep.factorized_entries_touched == 10


def test_complexity_report_skips_oversized_joint():
    net = binary_chain(20)
    rep = complexity_report(net, limit=2**16)
    assert rep.joint_states == 2**20
    assert rep.factorized_entries_touched <= 20 * 2 * 2
    assert rep.joint_build_seconds is None
    assert "guard" in rep.joint_note
