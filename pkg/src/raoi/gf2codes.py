"""GF(2) polynomials, CRC append/check, and cyclic block codes with syndrome decoding.

Bit sequences are MSB-first: ``bits[0]`` is the coefficient of the highest
power.  A length-L sequence ``b`` is the polynomial ``sum(b[j] * x**(L-1-j))``.
Polynomials themselves are stored as Python ints, bit j = coefficient of x^j.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np


class NoCyclicCodeError(ValueError):
    """No generator polynomial of the requested degree divides x^n + 1."""


@dataclass(frozen=True)
class Gf2Poly:
    value: int = 0

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("polynomial bit pattern must be nonnegative")

    @classmethod
    def from_coefficients(cls, coeffs) -> "Gf2Poly":
        """Build from a sequence where index j holds the coefficient of x^j."""
        v = 0
        for j, c in enumerate(coeffs):
            if c & 1:
                v |= 1 << j
        return cls(v)

    @classmethod
    def from_bits(cls, bits) -> "Gf2Poly":
        """Build from an MSB-first bit sequence."""
        v = 0
        for b in bits:
            v = (v << 1) | (int(b) & 1)
        return cls(v)

    @classmethod
    def from_hex(cls, text: str) -> "Gf2Poly":
        return cls(int(text, 16))

    @property
    def degree(self) -> int:
        """Degree of the polynomial; -1 stands for the zero polynomial."""
        return self.value.bit_length() - 1

    @property
    def coefficients(self) -> tuple[int, ...]:
        return tuple((self.value >> j) & 1 for j in range(self.value.bit_length()))

    def is_zero(self) -> bool:
        return self.value == 0

    def to_bits(self, length: int) -> np.ndarray:
        """MSB-first bit vector of the given length."""
        if self.degree >= length:
            raise ValueError(f"degree {self.degree} does not fit in {length} bits")
        return np.array([(self.value >> (length - 1 - j)) & 1 for j in range(length)], dtype=np.uint8)

    def to_hex(self) -> str:
        return hex(self.value)

    def __add__(self, other: "Gf2Poly") -> "Gf2Poly":
        return Gf2Poly(self.value ^ other.value)

    __sub__ = __add__

    def __mul__(self, other: "Gf2Poly") -> "Gf2Poly":
        a, b, out = self.value, other.value, 0
        while b:
            if b & 1:
                out ^= a
            a <<= 1
            b >>= 1
        return Gf2Poly(out)

    def __mod__(self, other: "Gf2Poly") -> "Gf2Poly":
        return poly_mod(self, other)

    def shift(self, j: int) -> "Gf2Poly":
        """Multiply by x^j."""
        return Gf2Poly(self.value << j)

    def __repr__(self):
        if self.value == 0:
            return "Gf2Poly(0)"
        terms = []
        for j in range(self.degree, -1, -1):
            if (self.value >> j) & 1:
                terms.append("1" if j == 0 else ("x" if j == 1 else f"x^{j}"))
        return f"Gf2Poly({' + '.join(terms)})"


def poly_mod(a: Gf2Poly, g: Gf2Poly) -> Gf2Poly:
    """Remainder of a / g by GF(2) long division."""
    if g.value == 0:
        raise ZeroDivisionError("division by the zero polynomial")
    r, dg = a.value, g.degree
    while r and r.bit_length() - 1 >= dg:
        r ^= g.value << (r.bit_length() - 1 - dg)
    return Gf2Poly(r)


def poly_divmod(a: Gf2Poly, g: Gf2Poly) -> tuple[Gf2Poly, Gf2Poly]:
    if g.value == 0:
        raise ZeroDivisionError("division by the zero polynomial")
    q, r, dg = 0, a.value, g.degree
    while r and r.bit_length() - 1 >= dg:
        s = r.bit_length() - 1 - dg
        q |= 1 << s
        r ^= g.value << s
    return Gf2Poly(q), Gf2Poly(r)


# ---------------------------------------------------------------------------
# CRC


@dataclass(frozen=True)
class CrcSpec:
    """CRC of ``c`` bits with the given generator; ``c == 0`` means no CRC."""

    c: int
    generator: Gf2Poly = Gf2Poly(1)

    def __post_init__(self):
        if self.c < 0:
            raise ValueError("CRC length must be >= 0")
        if self.c > 16:
            raise ValueError("CRC polynomials longer than 16 bits are not supported")
        if self.generator.degree != self.c:
            raise ValueError(f"generator degree {self.generator.degree} != CRC length {self.c}")
        if not self.generator.value & 1:
            raise ValueError("CRC generator must have constant term 1")

    @classmethod
    def from_hex(cls, poly_hex: str | int) -> "CrcSpec":
        g = Gf2Poly(poly_hex if isinstance(poly_hex, int) else int(poly_hex, 16))
        return cls(g.degree, g)

    @property
    def poly_hex(self) -> str:
        return hex(self.generator.value)


NO_CRC = CrcSpec(0, Gf2Poly(1))
CRC1 = CrcSpec(1, Gf2Poly(0x3))
CRC3 = CrcSpec(3, Gf2Poly(0xB))


def _as_bits(bits) -> np.ndarray:
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError("expected a 1-D bit sequence")
    if np.any(arr > 1):
        raise ValueError("bits must be 0 or 1")
    return arr


def crc_append(msg, crc: CrcSpec) -> np.ndarray:
    """Return ``msg`` followed by the ``c`` remainder bits of x^c m(x) mod g(x)."""
    msg = _as_bits(msg)
    if crc.c == 0:
        return msg.copy()
    if msg.size < 1:
        raise ValueError("message must hold at least one bit")
    rem = poly_mod(Gf2Poly.from_bits(msg).shift(crc.c), crc.generator)
    return np.concatenate([msg, rem.to_bits(crc.c)])


def crc_check(word, crc: CrcSpec) -> bool:
    word = _as_bits(word)
    if word.size < crc.c + 1:
        raise ValueError(f"word of {word.size} bits is too short for a {crc.c}-bit CRC")
    if crc.c == 0:
        return True
    return poly_mod(Gf2Poly.from_bits(word), crc.generator).is_zero()


@lru_cache(maxsize=None)
def remainder_matrix(length: int, g: Gf2Poly) -> np.ndarray:
    """(length, deg g) matrix R with bits @ R = remainder bits of the word mod g.

    Used for vectorised CRC checks: remainder is linear in the word.
    """
    dg = g.degree
    rows = [poly_mod(Gf2Poly(1 << (length - 1 - j)), g).to_bits(dg) for j in range(length)]
    out = np.array(rows, dtype=np.uint8).reshape(length, dg)
    out.setflags(write=False)
    return out


def crc_check_batch(words: np.ndarray, crc: CrcSpec) -> np.ndarray:
    """Row-wise ``crc_check`` for a 2-D uint8 array."""
    words = np.asarray(words, dtype=np.uint8)
    if crc.c == 0:
        return np.ones(words.shape[0], dtype=bool)
    R = remainder_matrix(words.shape[1], crc.generator)
    rem = (words.astype(np.int64) @ R) & 1
    return ~rem.any(axis=1)


def crc_append_batch(msgs: np.ndarray, crc: CrcSpec) -> np.ndarray:
    msgs = np.asarray(msgs, dtype=np.uint8)
    if crc.c == 0:
        return msgs.copy()
    k = msgs.shape[1]
    # remainder of x^c m(x): rows of the remainder matrix for length k + c, first k rows
    R = remainder_matrix(k + crc.c, crc.generator)[:k]
    rem = ((msgs.astype(np.int64) @ R) & 1).astype(np.uint8)
    return np.concatenate([msgs, rem], axis=1)


# ---------------------------------------------------------------------------
# Cyclic codes


def find_generator(n: int, K: int) -> Gf2Poly:
    """Smallest-pattern divisor of x^n + 1 with degree n - K and constant term 1."""
    if not 1 <= K < n:
        raise ValueError(f"need 1 <= K < n, got n={n}, K={K}")
    r = n - K
    xn1 = Gf2Poly((1 << n) | 1)
    for v in range((1 << r) | 1, 1 << (r + 1), 2):
        g = Gf2Poly(v)
        if poly_mod(xn1, g).is_zero():
            return g
    raise NoCyclicCodeError(f"no cyclic ({n}, {K}) code: x^{n}+1 has no divisor of degree {r}")


@dataclass(frozen=True, eq=False)
class CodeSpec:
    """Systematic cyclic (n, K) code with a complete syndrome table.

    Codewords are ``[m | r]`` with r the remainder of x^(n-K) m(x) mod g(x).
    """

    n: int
    K: int
    generator: Gf2Poly
    generator_matrix: np.ndarray = field(repr=False)
    parity_check: np.ndarray = field(repr=False)
    syndrome_table: np.ndarray = field(repr=False)
    leader_weights: np.ndarray = field(repr=False)

    @property
    def r(self) -> int:
        return self.n - self.K

    def syndrome_index(self, words: np.ndarray) -> np.ndarray:
        """Integer syndromes (bit j of the integer = syndrome component j)."""
        s = (np.asarray(words, dtype=np.int64) @ self.parity_check.T.astype(np.int64)) & 1
        return s @ (1 << np.arange(self.r, dtype=np.int64))


def _pattern_value(bits: np.ndarray) -> np.ndarray:
    # integer value of an error pattern with sequence position 0 as the LSB
    return bits.astype(np.int64) @ (1 << np.arange(bits.shape[-1], dtype=np.int64))


@lru_cache(maxsize=64)
def build_code(n: int, K: int) -> CodeSpec:
    g = find_generator(n, K)
    r = n - K
    # parity part: remainders of x^(n-K) * x^(K-1-j) for message position j
    P = np.array([poly_mod(Gf2Poly(1 << (n - 1 - j)), g).to_bits(r) for j in range(K)],
                 dtype=np.uint8).reshape(K, r)
    G = np.concatenate([np.eye(K, dtype=np.uint8), P], axis=1)
    H = np.concatenate([P.T, np.eye(r, dtype=np.uint8)], axis=1)

    table = np.zeros((1 << r, n), dtype=np.uint8)
    weights = np.full(1 << r, -1, dtype=np.int64)
    weights[0] = 0
    filled = 1
    weight_of_pow = 1 << np.arange(r, dtype=np.int64)
    for w in range(1, n + 1):
        if filled == 1 << r:
            break
        idx = np.array(list(combinations(range(n), w)), dtype=np.int64)
        pats = np.zeros((idx.shape[0], n), dtype=np.uint8)
        np.put_along_axis(pats, idx, 1, axis=1)
        pats = pats[np.argsort(_pattern_value(pats), kind="stable")]
        syn = (((pats.astype(np.int64) @ H.T.astype(np.int64)) & 1) @ weight_of_pow)
        for s, pat in zip(syn, pats):
            if weights[s] < 0:
                weights[s] = w
                table[s] = pat
                filled += 1
    for a in (G, H, table, weights):
        a.setflags(write=False)
    return CodeSpec(n, K, g, G, H, table, weights)


def encode(code: CodeSpec, msg) -> np.ndarray:
    msg = _as_bits(msg)
    if msg.size != code.K:
        raise ValueError(f"message length {msg.size} != K={code.K}")
    return ((msg.astype(np.int64) @ code.generator_matrix) & 1).astype(np.uint8)


def encode_batch(code: CodeSpec, msgs: np.ndarray) -> np.ndarray:
    msgs = np.asarray(msgs, dtype=np.int64)
    if msgs.shape[1] != code.K:
        raise ValueError(f"message length {msgs.shape[1]} != K={code.K}")
    return ((msgs @ code.generator_matrix) & 1).astype(np.uint8)


def decode(code: CodeSpec, received) -> np.ndarray:
    received = _as_bits(received)
    if received.size != code.n:
        raise ValueError(f"received length {received.size} != n={code.n}")
    return decode_batch(code, received[None, :])[0]


def decode_batch(code: CodeSpec, received: np.ndarray) -> np.ndarray:
    """Coset-leader correction of every row; returns the K information bits."""
    received = np.asarray(received, dtype=np.uint8)
    if received.shape[1] != code.n:
        raise ValueError(f"received length {received.shape[1]} != n={code.n}")
    corrected = received ^ code.syndrome_table[code.syndrome_index(received)]
    return corrected[:, :code.K]


def all_codewords(code: CodeSpec) -> np.ndarray:
    msgs = ((np.arange(1 << code.K)[:, None] >> np.arange(code.K - 1, -1, -1)) & 1)
    return encode_batch(code, msgs)


def minimum_distance(code: CodeSpec) -> int:
    """Brute force over all nonzero codewords (fine for K <= ~16)."""
    words = all_codewords(code)
    return int(words[1:].sum(axis=1).min())
