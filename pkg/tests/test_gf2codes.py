from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import flip, long_division_remainder
from raoi.gf2codes import (
    CRC1,
    CRC3,
    CrcSpec,
    Gf2Poly,
    NoCyclicCodeError,
    all_codewords,
    build_code,
    crc_append,
    crc_append_batch,
    crc_check,
    crc_check_batch,
    decode,
    decode_batch,
    encode,
    find_generator,
    minimum_distance,
    poly_divmod,
    poly_mod,
)

polys = st.integers(min_value=0, max_value=(1 << 24) - 1).map(Gf2Poly)
nonzero_polys = st.integers(min_value=1, max_value=(1 << 12) - 1).map(Gf2Poly)


def poly_bits_msb(p: Gf2Poly, length: int):
    return [int(b) for b in p.to_bits(length)]


# -- polynomial arithmetic ----------------------------------------------------

def test_mod_example_divisible():
    a = Gf2Poly.from_coefficients([0, 0, 0, 1, 1, 0, 1])   # x^6 + x^4 + x^3
    assert poly_mod(a, Gf2Poly(0b1011)).is_zero()


def test_mod_small_and_zero_inputs():
    g = Gf2Poly(0b1011)
    assert poly_mod(Gf2Poly(0b100), g) == Gf2Poly(0b100)
    assert poly_mod(Gf2Poly(0), Gf2Poly(0b11)).is_zero()


def test_mod_by_zero_raises():
    with pytest.raises(ZeroDivisionError):
        poly_mod(Gf2Poly(5), Gf2Poly(0))


@given(polys, nonzero_polys)
def test_mod_matches_long_division(a, g):
    L = max(a.degree, g.degree) + 1
    ref = long_division_remainder(poly_bits_msb(a, L), poly_bits_msb(g, g.degree + 1))
    r = poly_mod(a, g)
    assert r.degree < g.degree
    assert poly_bits_msb(r, g.degree) == ref if g.degree > 0 else r.is_zero()


@given(polys, nonzero_polys)
def test_divmod_reconstructs(a, g):
    q, r = poly_divmod(a, g)
    assert q * g + r == a


@given(polys, polys, polys)
def test_ring_laws(a, b, c):
    assert a * (b + c) == a * b + a * c
    assert a + a == Gf2Poly(0)
    assert (a * b) * c == a * (b * c)


@given(polys)
def test_hex_and_bit_round_trip(a):
    assert Gf2Poly.from_hex(a.to_hex()) == a
    L = max(a.degree, 0) + 1
    assert Gf2Poly.from_bits(a.to_bits(L)) == a


# -- CRC ------------------------------------------------------------------------

def test_crc_append_examples():
    assert crc_append([1, 0, 1, 1], CRC3).tolist() == [1, 0, 1, 1, 0, 0, 0]
    assert crc_append([1, 0, 1], CRC1).tolist() == [1, 0, 1, 0]
    assert crc_append([0, 0, 0, 0], CRC3).tolist() == [0] * 7


@given(st.lists(st.integers(0, 1), min_size=1, max_size=20))
def test_crc1_is_even_parity(msg):
    word = crc_append(msg, CRC1)
    assert word.sum() % 2 == 0


@given(st.lists(st.integers(0, 1), min_size=1, max_size=20),
       st.sampled_from([CRC1, CRC3, CrcSpec.from_hex("0x13")]))
def test_crc_append_matches_long_division(msg, crc):
    g = poly_bits_msb(crc.generator, crc.c + 1)
    ref = long_division_remainder(list(msg) + [0] * crc.c, g)
    word = crc_append(msg, crc)
    assert word[:len(msg)].tolist() == list(msg)
    assert word[len(msg):].tolist() == ref
    assert crc_check(word, crc)


def test_crc3_detects_every_single_error():
    word = crc_append([1, 0, 1, 1], CRC3)
    for j in range(7):
        assert not crc_check(flip(word, [j]), CRC3)


def test_crc3_misses_exactly_the_multiples_of_g():
    word = crc_append([1, 0, 1, 1], CRC3)
    missed = []
    for v in range(1, 128):
        e = np.array([(v >> (6 - j)) & 1 for j in range(7)], dtype=np.uint8)
        if crc_check(word ^ e, CRC3):
            missed.append(v)
    multiples = {(Gf2Poly(q) * CRC3.generator).value for q in range(1, 16)}
    assert len(missed) == 15
    assert set(missed) == multiples


def test_crc_check_rejects_short_words():
    with pytest.raises(ValueError):
        crc_check([1, 0, 1], CRC3)


def test_crc_spec_validation():
    with pytest.raises(ValueError):
        CrcSpec(3, Gf2Poly(0b1010))        # no constant term
    with pytest.raises(ValueError):
        CrcSpec(2, Gf2Poly(0b1011))        # degree mismatch


@given(st.integers(1, 12), st.integers(1, 40), st.sampled_from([CRC1, CRC3]), st.integers(0, 2**32 - 1))
def test_batch_crc_matches_scalar(k, rows, crc, seed):
    rng = np.random.default_rng(seed)
    msgs = rng.integers(0, 2, (rows, k), dtype=np.uint8)
    words = crc_append_batch(msgs, crc)
    for m, w in zip(msgs, words):
        assert w.tolist() == crc_append(m, crc).tolist()
    noisy = words ^ rng.integers(0, 2, words.shape, dtype=np.uint8)
    assert crc_check_batch(noisy, crc).tolist() == [crc_check(w, crc) for w in noisy]


# -- cyclic codes -------------------------------------------------------------------

def test_generator_examples():
    assert find_generator(15, 14) == Gf2Poly(0b11)
    assert find_generator(7, 4) == Gf2Poly(0b1011)
    with pytest.raises(ValueError):
        find_generator(15, 15)
    with pytest.raises(NoCyclicCodeError):
        find_generator(9, 5)     # x^9+1 factors into degrees 1, 2, 6


@pytest.mark.parametrize("K", range(1, 15))
def test_generator_divides_and_is_smallest(K):
    g = find_generator(15, K)
    xn1 = Gf2Poly((1 << 15) | 1)
    assert g.degree == 15 - K
    assert poly_mod(xn1, g).is_zero()
    smaller = [v for v in range(1 << (15 - K), g.value) if v & 1
               and poly_mod(xn1, Gf2Poly(v)).is_zero()]
    assert not smaller


@pytest.mark.parametrize("K", range(1, 15))
def test_code_is_cyclic_and_consistent(K):
    code = build_code(15, K)
    G, H = code.generator_matrix, code.parity_check
    assert not ((G.astype(int) @ H.T.astype(int)) % 2).any()
    words = all_codewords(code)
    as_set = {w.tobytes() for w in words}
    for w in words[:64]:
        assert np.roll(w, 1).tobytes() in as_set


def test_encode_example_and_zero():
    code = build_code(7, 4)
    assert encode(code, [1, 0, 1, 1]).tolist() == [1, 0, 1, 1, 0, 0, 0]
    assert encode(code, [0, 0, 0, 0]).tolist() == [0] * 7
    with pytest.raises(ValueError):
        encode(code, [1, 0, 1])
    with pytest.raises(ValueError):
        decode(code, [1, 0, 1])


def test_hamming_7_4_distance_and_single_error_correction():
    code = build_code(7, 4)
    assert minimum_distance(code) == 3
    for m in product([0, 1], repeat=4):
        c = encode(code, m)
        assert decode(code, c).tolist() == list(m)
        for j in range(7):
            assert decode(code, flip(c, [j])).tolist() == list(m)


def brute_dmin(code):
    best = code.n
    for m in product([0, 1], repeat=code.K):
        if any(m):
            best = min(best, int(encode(code, m).sum()))
    return best


def test_15_5_corrects_all_patterns_up_to_t():
    code = build_code(15, 5)
    d = brute_dmin(code)
    assert d == minimum_distance(code)
    t = (d - 1) // 2
    assert t >= 1
    rng = np.random.default_rng(3)
    msgs = [tuple(rng.integers(0, 2, 5)) for _ in range(6)]
    for m in msgs:
        c = encode(code, m)
        for w in range(t + 1):
            for pos in combinations(range(15), w):
                assert decode(code, flip(c, pos)).tolist() == list(m)


def test_syndrome_table_complete():
    code = build_code(15, 5)
    assert code.syndrome_table.shape == (1024, 15)
    assert not code.syndrome_table[0].any()
    assert (code.leader_weights >= 0).all()
    # every leader really has its syndrome
    assert (code.syndrome_index(code.syndrome_table) == np.arange(1024)).all()


@pytest.mark.parametrize("K", [4, 7, 11])
def test_leaders_have_minimum_weight(K):
    code = build_code(15, K)
    r = 15 - K
    best = np.full(1 << r, 99)
    pats = ((np.arange(1 << 15)[:, None] >> np.arange(15)) & 1).astype(np.uint8)
    syn = code.syndrome_index(pats)
    np.minimum.at(best, syn, pats.sum(axis=1))
    assert (best == code.leader_weights).all()
    assert (code.syndrome_table.sum(axis=1) == best).all()


@given(st.sampled_from([(7, 4), (15, 5), (15, 11), (15, 7)]), st.integers(0, 2**32 - 1))
def test_batch_decode_matches_scalar(nk, seed):
    code = build_code(*nk)
    rng = np.random.default_rng(seed)
    rx = rng.integers(0, 2, (25, code.n), dtype=np.uint8)
    dec = decode_batch(code, rx)
    for row, d in zip(rx, dec):
        assert decode(code, row).tolist() == d.tolist()


def test_dmin_for_all_15_codes_is_plausible():
    # known values for the smallest-pattern generators; checked against brute force above
    expected = [15, 10, 5, 8, 3, 6, 5, 4, 3, 2, 3, 2, 2, 2]
    assert [minimum_distance(build_code(15, K)) for K in range(1, 15)] == expected
