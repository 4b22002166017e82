"""BPSK over a real unit-variance AWGN channel with hard decisions, and the packet pipeline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gf2codes import (
    CodeSpec,
    CrcSpec,
    crc_append,
    crc_append_batch,
    crc_check,
    crc_check_batch,
    decode,
    decode_batch,
    encode,
    encode_batch,
)


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream keyed by a root seed and a tuple id.

    Two streams with the same ``(seed, stream_id)`` produce the same samples
    no matter which worker or in which order they are consumed.
    """

    seed: int
    stream_id: tuple[int, ...] = ()

    def child(self, *ids: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id + tuple(int(i) for i in ids))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed & 0xFFFFFFFFFFFFFFFF, spawn_key=self.stream_id)
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class PacketOutcome:
    reported_success: bool
    genie_success: bool
    power_used: float

    def __post_init__(self):
        if self.genie_success and not self.reported_success:
            raise ValueError("genie success must imply reported success")

    @property
    def undetected(self) -> bool:
        return self.reported_success and not self.genie_success


def bpsk_modulate(bits, P: float) -> np.ndarray:
    if not P > 0:
        raise ValueError(f"power must be positive, got {P}")
    bits = np.asarray(bits)
    return (1.0 - 2.0 * bits) * np.sqrt(P)


def awgn(symbols, rng: RngStream | np.random.Generator) -> np.ndarray:
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    symbols = np.asarray(symbols, dtype=float)
    return symbols + gen.standard_normal(symbols.shape)


def hard_decision(received) -> np.ndarray:
    # ties at exactly zero go to bit 0
    return (np.asarray(received) < 0).astype(np.uint8)


def transmit_packet(msg, crc: CrcSpec, code: CodeSpec, P: float, rng: RngStream) -> PacketOutcome:
    """Send one k-bit message through CRC, encoder, BPSK, AWGN, decoder, CRC check.

    Genie success means all k + c decoded bits match what was sent, which
    guarantees the CRC also passes.
    """
    msg = np.asarray(msg, dtype=np.uint8)
    if code.K != msg.size + crc.c:
        raise ValueError(f"code dimension {code.K} != k + c = {msg.size} + {crc.c}")
    word = crc_append(msg, crc)
    rx = hard_decision(awgn(bpsk_modulate(encode(code, word), P), rng))
    est = decode(code, rx)
    genie = bool(np.array_equal(est, word))
    return PacketOutcome(crc_check(est, crc), genie, float(P))


def transmit_batch(k: int, crc: CrcSpec, code: CodeSpec, P: float, trials: int,
                   gen: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ``transmit_packet`` over random messages.

    Returns boolean arrays (reported, genie) of length ``trials``.
    """
    if code.K != k + crc.c:
        raise ValueError(f"code dimension {code.K} != k + c = {k} + {crc.c}")
    if not P > 0:
        raise ValueError(f"power must be positive, got {P}")
    msgs = gen.integers(0, 2, size=(trials, k), dtype=np.uint8)
    words = crc_append_batch(msgs, crc)
    tx = bpsk_modulate(encode_batch(code, words), P)
    rx = hard_decision(tx + gen.standard_normal(tx.shape))
    est = decode_batch(code, rx)
    genie = (est == words).all(axis=1)
    reported = crc_check_batch(est, crc)
    return reported, genie
