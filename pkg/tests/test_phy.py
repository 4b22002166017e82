import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from raoi.gf2codes import CRC1, CRC3, NO_CRC, all_codewords, build_code
from raoi.phy import (
    PacketOutcome,
    RngStream,
    awgn,
    bpsk_modulate,
    hard_decision,
    transmit_batch,
    transmit_packet,
)


def q(x):
    return 0.5 * math.erfc(x / math.sqrt(2))


def exact_success(n, K, P):
    """Probability the error pattern is its coset's minimum-weight member,
    with cosets enumerated from the codeword set (no syndrome table)."""
    code = build_code(n, K)
    words = all_codewords(code)
    seen = set()
    weights = []
    for v in range(1 << n):
        e = np.array([(v >> j) & 1 for j in range(n)], dtype=np.uint8)
        coset = words ^ e
        key = min(int("".join(map(str, c)), 2) for c in coset)
        if key not in seen:
            seen.add(key)
            weights.append(int(coset.sum(axis=1).min()))
    p = q(math.sqrt(P))
    return sum(p ** w * (1 - p) ** (n - w) for w in weights)


def test_bpsk_examples():
    assert bpsk_modulate([0, 0, 0], 4).tolist() == [2, 2, 2]
    assert bpsk_modulate([0, 1], 1).tolist() == [1, -1]
    with pytest.raises(ValueError):
        bpsk_modulate([0, 1], 0)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=64), st.sampled_from([1.0, 2.0, 3.0, 4.0, 0.37]))
def test_bpsk_energy_and_round_trip(bits, P):
    x = bpsk_modulate(bits, P)
    assert abs(float(x @ x) - len(bits) * P) <= 1e-9 * len(bits) * P
    assert hard_decision(x).tolist() == bits


def test_hard_decision_sign_and_tie():
    assert hard_decision([2.0, -0.1, 0.0]).tolist() == [0, 1, 0]
    assert hard_decision([-1e-12]).tolist() == [1]


def test_awgn_moments():
    y = awgn(np.zeros(1_000_000), RngStream(11, (5,)))
    assert abs(y.mean()) <= 0.005
    assert 0.995 <= y.var() <= 1.005


def test_streams_are_reproducible_and_distinct():
    a = awgn(np.zeros(100), RngStream(1, (2, 3)))
    b = awgn(np.zeros(100), RngStream(1, (2, 3)))
    c = awgn(np.zeros(100), RngStream(1, (2, 4)))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert RngStream(1).child(2).child(3) == RngStream(1, (2, 3))


def test_outcome_rejects_genie_without_reported():
    with pytest.raises(ValueError):
        PacketOutcome(False, True, 1.0)
    assert PacketOutcome(True, False, 1.0).undetected


def test_noiseless_packet_succeeds():
    code = build_code(15, 8)
    out = transmit_packet([1, 0, 1, 1, 0, 0, 1], CRC1, code, 1e6, RngStream(0))
    assert out.reported_success and out.genie_success and not out.undetected


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        transmit_packet([1, 0, 1], CRC3, build_code(15, 5), 1.0, RngStream(0))


def test_packet_determinism():
    code = build_code(15, 7)
    outs = [transmit_packet([1, 1, 0, 1], CRC3, code, 1.0, RngStream(9, (t,))) for t in range(50)]
    again = [transmit_packet([1, 1, 0, 1], CRC3, code, 1.0, RngStream(9, (t,))) for t in range(50)]
    assert outs == again


def test_genie_implies_reported_over_many_trials():
    code = build_code(15, 8)
    rep, gen = transmit_batch(5, CRC3, code, 1.0, 100_000, np.random.default_rng(4))
    assert not (gen & ~rep).any()
    assert (rep & ~gen).any()          # some undetected errors do occur at low power


def test_scalar_packets_match_batch_statistics():
    code = build_code(15, 6)
    root = RngStream(2)
    hits = sum(transmit_packet(np.random.default_rng(t).integers(0, 2, 5), CRC1, code, 2.0,
                               root.child(t)).genie_success for t in range(4000))
    rep, gen = transmit_batch(5, CRC1, code, 2.0, 200_000, np.random.default_rng(7))
    p = gen.mean()
    assert abs(hits / 4000 - p) <= 3 * math.sqrt(p * (1 - p) / 4000) + 3 * math.sqrt(p * (1 - p) / 200_000)


@pytest.mark.parametrize("P", [1.0, 2.0, 4.0])
def test_hamming_success_matches_exact_coset_probability(P):
    trials = 100_000
    rep, gen = transmit_batch(4, NO_CRC, build_code(7, 4), P, trials, np.random.default_rng(int(P)))
    exact = exact_success(7, 4, P)
    p = q(math.sqrt(P))
    bound = sum(math.comb(7, j) * p ** j * (1 - p) ** (7 - j) for j in range(2))
    sigma = math.sqrt(exact * (1 - exact) / trials)
    assert exact >= bound - 1e-12
    assert abs(gen.mean() - exact) <= 3 * sigma
    assert rep.all()                    # no CRC: every packet is accepted


def test_success_grows_with_power():
    code = build_code(15, 8)
    rates = []
    for P in (1.0, 2.0, 3.0, 4.0):
        rep, _ = transmit_batch(7, CRC1, code, P, 100_000, np.random.default_rng(10 + int(P)))
        rates.append(rep.mean())
    for a, b in zip(rates, rates[1:]):
        assert b >= a - 3 * math.sqrt(0.25 / 100_000) * 2
