"""SHA-256: native digest plus the bit-level circuit gadget.

Circuit words are 32 boolean slots (LSB first) plus, where additions need
it, one packed slot holding the integer value.  Rotations and shifts are pure
rewiring.  Modular additions decompose the field sum into 32 result bits and
a few carry bits via a hint, then tie everything together with linear gates.

One compression block is recorded once as a template and replayed per
block, so circuits for many blocks are cheap to assemble.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .circuit import (Circuit, CircuitBuilder, CircuitError, Template, Witness,
                      to_field_array)
from .field import INV2, P

MAX_MESSAGE_BYTES = (1 << 61) - 1


def _first_primes(count: int) -> list[int]:
    primes, k = [], 2
    while len(primes) < count:
        if all(k % q for q in primes if q * q <= k):
            primes.append(k)
        k += 1
    return primes


def _frac_bits(p: int, root: int) -> int:
    """First 32 bits of the fractional part of p^(1/root)."""
    scaled = p << (32 * root)
    x = math.isqrt(scaled) if root == 2 else _icbrt(scaled)
    return x & 0xFFFFFFFF


def _icbrt(v: int) -> int:
    x = int(round(v ** (1 / 3)))
    while x ** 3 > v:
        x -= 1
    while (x + 1) ** 3 <= v:
        x += 1
    return x


IV = tuple(_frac_bits(p, 2) for p in _first_primes(8))
ROUND_CONSTANTS = tuple(_frac_bits(p, 3) for p in _first_primes(64))


class DigestResult(NamedTuple):
    value: bytes
    compressions: int

    def hex(self) -> str:
        return self.value.hex()


@dataclass(frozen=True)
class PaddedMessage:
    blocks: tuple[bytes, ...]
    original_len: int

    @property
    def data(self) -> bytes:
        return b"".join(self.blocks)


def block_count(length: int) -> int:
    return (length + 9 + 63) // 64


def pad_message(message: bytes) -> PaddedMessage:
    message = bytes(message)
    if len(message) > MAX_MESSAGE_BYTES:
        raise ValueError("message too long")
    nb = block_count(len(message))
    padded = message + b"\x80" + b"\x00" * (64 * nb - len(message) - 9) + (8 * len(message)).to_bytes(8, "big")
    return PaddedMessage(tuple(padded[i:i + 64] for i in range(0, len(padded), 64)), len(message))


def digest(message: bytes) -> DigestResult:
    return DigestResult(hashlib.sha256(message).digest(), block_count(len(message)))


def native_verify(message: bytes, claimed: bytes) -> bool:
    if len(claimed) != 32:
        raise ValueError("claimed digest must be 32 bytes")
    return hashlib.sha256(message).digest() == bytes(claimed)


def digest_words(d: bytes) -> list[int]:
    return [int.from_bytes(d[4 * i:4 * i + 4], "big") for i in range(8)]


def words_to_digest(words) -> bytes:
    return b"".join(int(w).to_bytes(4, "big") for w in words)


# ---------------------------------------------------------------- gadget

class _Word:
    __slots__ = ("bits", "packed")

    def __init__(self, bits: np.ndarray, packed: int | None):
        self.bits = bits
        self.packed = packed


_BOOL = to_field_array([P - 1, 0, 1, 0, 0])          # x*x - x = 0
_XOR = to_field_array([1, 1, P - 2, P - 1, 0])       # c = a + b - 2ab
_SUB = to_field_array([1, P - 1, 0, P - 1, 0])       # c = a - b
_MUL = to_field_array([0, 0, 1, P - 1, 0])           # c = a*b
_ADD = to_field_array([1, 1, 0, P - 1, 0])           # c = a + b


def _pack_selectors(weights_log: range) -> np.ndarray:
    sel = np.zeros((len(weights_log), 5), dtype=np.uint64)
    sel[:, 0] = 1
    sel[:, 1] = [1 << k for k in weights_log]
    sel[:, 3] = P - 1
    return sel


_PACK32 = _pack_selectors(range(1, 32))


class _Gadget:
    """Gate emitters over a builder; slot ids are numpy int64 arrays."""

    def __init__(self, b: CircuitBuilder, zero: int, one: int):
        self.b = b
        self.zero = zero
        self.one = one

    def booleanity(self, bits: np.ndarray) -> None:
        self.b.add_gates(_BOOL, np.stack([bits, bits, bits], axis=1))

    def xor(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Bitwise XOR; lanes where either side is the constant-zero slot are rewired."""
        out = np.where(x == self.zero, y, x).copy()
        live = (x != self.zero) & (y != self.zero)
        k = int(live.sum())
        if k:
            c = self.b.new_slots(k)
            self.b.add_gates(_XOR, np.stack([x[live], y[live], c], axis=1), defines=True)
            out[live] = c
        return out

    def xor3(self, x, y, z) -> np.ndarray:
        return self.xor(self.xor(x, y), z)

    def pack(self, bits: np.ndarray) -> int:
        """Weighted bit sum via a chain; returns the slot of the full sum."""
        k = len(bits)
        acc = self.b.new_slots(k - 1)
        a = np.concatenate([bits[:1], acc[:-1]])
        sel = _PACK32 if k == 32 else _pack_selectors(range(1, k))
        self.b.add_gates(sel, np.stack([a, bits[1:], acc], axis=1), defines=True)
        return int(acc[-1])

    def add_mod32(self, terms: list[tuple[int, int]], carries: int, const: int = 0) -> _Word:
        """sum(coeff*slot) + const = R + 2^32*carry with R, carry bit-decomposed."""
        b = self.b
        bits = b.new_slots(32 + carries)
        b.add_hint(bits, terms, const)
        self.booleanity(bits)
        acc = b.new_slots(31 + carries)
        a = np.concatenate([bits[:1], acc[:-1]])
        b.add_gates(_pack_selectors(range(1, 32 + carries)), np.stack([a, bits[1:], acc], axis=1), defines=True)
        packed, total = int(acc[30]), int(acc[-1])
        # term chain: u = c1*s1 + c2*s2, u += c_i*s_i, last gate checks against total
        (s1, c1), rest = terms[0], terms[1:]
        if not rest:
            b.add_gate((c1, 0, 0, -1, const), (s1, s1, total))
        else:
            u, cu = s1, c1
            for j, (s, c) in enumerate(rest):
                if j == len(rest) - 1:
                    b.add_gate((cu, c, 0, -1, const), (u, s, total))
                else:
                    v = b.new_slot()
                    b.add_gate((cu, c, 0, -1, 0), (u, s, v), defines=True)
                    u, cu = v, 1
        return _Word(bits[:32], packed)

    def const_word(self, value: int) -> _Word:
        bits = np.array([self.one if (value >> i) & 1 else self.zero for i in range(32)], dtype=np.int64)
        w = self.b.new_slot()
        self.b.add_gate((0, 0, 0, -1, value), (self.zero, self.zero, w), defines=True)
        return _Word(bits, w)


def _rotr(bits: np.ndarray, r: int) -> np.ndarray:
    return np.roll(bits, -r)


def _shr(bits: np.ndarray, r: int, zero: int) -> np.ndarray:
    return np.concatenate([bits[r:], np.full(r, zero, dtype=np.int64)])


# interface of the compression template (template slot ids)
_T_ZERO, _T_ONE = 0, 1
_T_STATE = 2                       # 8 words x 33 (32 bits then packed)
_T_MSG = _T_STATE + 8 * 33         # 512 message bits, byte-major, LSB first within byte
_T_EXTERNAL = _T_MSG + 512


@dataclass
class _CompressionTemplate:
    template: Template
    out_bits: np.ndarray   # (8, 32) template ids
    out_packed: np.ndarray  # (8,)


@lru_cache(maxsize=1)
def _compression_template() -> _CompressionTemplate:
    b = CircuitBuilder()
    b.new_slots(_T_EXTERNAL)
    g = _Gadget(b, _T_ZERO, _T_ONE)
    state = []
    for i in range(8):
        base = _T_STATE + 33 * i
        state.append(_Word(np.arange(base, base + 32, dtype=np.int64), base + 32))
    msg = np.arange(_T_MSG, _T_MSG + 512, dtype=np.int64).reshape(64, 8)

    g.booleanity(msg.reshape(-1))
    # W_j is big-endian over bytes 4j..4j+3: bit i lives in byte 4j + 3 - i//8, bit i%8
    w = []
    for j in range(16):
        bits = np.concatenate([msg[4 * j + 3 - q] for q in range(4)])
        w.append(_Word(bits, g.pack(bits)))
    for t in range(16, 64):
        x15, x2 = w[t - 15].bits, w[t - 2].bits
        s0 = g.pack(g.xor3(_rotr(x15, 7), _rotr(x15, 18), _shr(x15, 3, g.zero)))
        s1 = g.pack(g.xor3(_rotr(x2, 17), _rotr(x2, 19), _shr(x2, 10, g.zero)))
        w.append(g.add_mod32([(s1, 1), (w[t - 7].packed, 1), (s0, 1), (w[t - 16].packed, 1)], carries=2))

    a, bb, c, d, e, f, gg, h = state
    p_prev = g.xor(bb.bits, c.bits)  # b ^ c, carried forward as the previous a ^ b
    for t in range(64):
        s1 = g.pack(g.xor3(_rotr(e.bits, 6), _rotr(e.bits, 11), _rotr(e.bits, 25)))
        diff = b.new_slots(32)
        b.add_gates(_SUB, np.stack([f.bits, gg.bits, diff], axis=1), defines=True)
        u = b.new_slots(32)
        b.add_gates(_MUL, np.stack([e.bits, diff, u], axis=1), defines=True)
        u_packed = g.pack(u)                       # ch = g + e*(f - g)
        s0 = g.pack(g.xor3(_rotr(a.bits, 2), _rotr(a.bits, 13), _rotr(a.bits, 22)))
        x3 = g.xor(a.bits, p_prev)                 # a ^ b ^ c
        p_next = g.xor(a.bits, bb.bits)
        x3_packed = g.pack(x3)                     # maj = (a + b + c - xor3) / 2
        t1 = b.new_slots(4)
        b.add_gates(np.stack([_ADD, _ADD, _ADD, to_field_array([1, 1, 0, P - 1, ROUND_CONSTANTS[t]])]),
                    np.array([[h.packed, s1, t1[0]], [t1[0], gg.packed, t1[1]],
                              [t1[1], u_packed, t1[2]], [t1[2], w[t].packed, t1[3]]]), defines=True)
        t1s = int(t1[3])
        new_e = g.add_mod32([(d.packed, 1), (t1s, 1)], carries=3)
        new_a = g.add_mod32([(t1s, 1), (s0, 1), (a.packed, INV2), (bb.packed, INV2),
                             (c.packed, INV2), (x3_packed, P - INV2)], carries=3)
        h, gg, f, e, d, c, bb, a = gg, f, e, new_e, c, bb, a, new_a
        p_prev = p_next

    out = [g.add_mod32([(state[i].packed, 1), (v.packed, 1)], carries=1)
           for i, v in enumerate((a, bb, c, d, e, f, gg, h))]
    return _CompressionTemplate(
        Template(b, _T_EXTERNAL),
        np.stack([o.bits for o in out]),
        np.array([o.packed for o in out], dtype=np.int64),
    )


@dataclass
class Sha256Layout:
    circuit: Circuit
    num_blocks: int
    message_bit_slots: np.ndarray   # (num_blocks, 64, 8): block, byte, bit (LSB first)
    digest_slots: np.ndarray        # 8 packed words = circuit.public_slots[:8]
    length_public: int              # slot of the byte length
    window_start: int               # first byte position of the padding window
    window_slots: np.ndarray        # indicator slots e_j = [j >= length]

    def to_bytes(self) -> bytes:
        head = np.array([self.num_blocks, self.length_public, self.window_start, len(self.window_slots)],
                        dtype="<u8").tobytes()
        return (head + self.message_bit_slots.astype("<u8").tobytes()
                + self.digest_slots.astype("<u8").tobytes()
                + self.window_slots.astype("<u8").tobytes() + self.circuit.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "Sha256Layout":
        if len(data) < 32:
            raise CircuitError("truncated layout")
        nb, length_slot, wstart, wlen = (int(x) for x in np.frombuffer(data[:32], dtype="<u8"))
        if not 1 <= nb <= (1 << 40) or wlen > 64:
            raise CircuitError("inconsistent layout header")
        off = 32
        sizes = (nb * 512, 8, wlen)
        arrays = []
        for size in sizes:
            end = off + 8 * size
            if end > len(data):
                raise CircuitError("truncated layout")
            arrays.append(np.frombuffer(data[off:end], dtype="<u8").astype(np.int64))
            off = end
        circuit = Circuit.from_bytes(data[off:])
        for arr in arrays:
            if arr.size and arr.max() >= circuit.num_slots:
                raise CircuitError("layout slot out of range")
        layout = cls(circuit, nb, arrays[0].reshape(nb, 64, 8), arrays[1], length_slot, wstart, arrays[2])
        if not np.array_equal(circuit.public_slots[:8], layout.digest_slots):
            raise CircuitError("digest slots do not match public slots")
        return layout


def _window(num_blocks: int) -> tuple[int, int]:
    """Byte positions where the 0x80 marker may sit for this block count."""
    total = 64 * num_blocks
    start = max(0, total - 72)
    return start, total - 9 - start + 1


def build_sha256_circuit(num_blocks: int) -> Sha256Layout:
    if num_blocks < 1:
        raise CircuitError("need at least one block")
    tpl = _compression_template()
    b = CircuitBuilder()
    zero, one = int(b.new_slot()), int(b.new_slot())
    b.add_gate((0, 0, 0, -1, 0), (zero, zero, zero), defines=True)
    b.add_gate((0, 0, 0, -1, 1), (zero, zero, one), defines=True)
    g = _Gadget(b, zero, one)
    state = [g.const_word(v) for v in IV]
    msg_bits = b.new_slots(512 * num_blocks).reshape(num_blocks, 64, 8)

    for blk in range(num_blocks):
        external = np.concatenate([[zero, one]]
                                  + [np.append(wd.bits, wd.packed) for wd in state]
                                  + [msg_bits[blk].reshape(-1)])
        remap = tpl.template.instantiate(b, external)
        bits, packed = remap[tpl.out_bits], remap[tpl.out_packed]
        state = [_Word(bits[i], int(packed[i])) for i in range(8)]

    # padding: within the window, e_j = [j >= len]; byte len is 0x80, later bytes zero
    flat = msg_bits.reshape(-1, 8)
    start, width = _window(num_blocks)
    e = b.new_slots(width)
    g.booleanity(e)
    if width > 1:
        b.add_gates((1, 0, P - 1, 0, 0), np.stack([e[:-1], e[1:], e[1:]], axis=1))  # e_{j-1} <= e_j
    b.add_gate((1, 0, 0, 0, -1), (e[-1], e[-1], e[-1]))
    d = np.empty(width, dtype=np.int64)
    d[0] = e[0]
    if width > 1:
        d[1:] = b.new_slots(width - 1)
        b.add_gates(_SUB, np.stack([e[1:], e[:-1], d[1:]], axis=1), defines=True)
    wbits = flat[start:start + width]
    for k in range(8):
        if k == 7:
            b.add_gates((0, 0, 1, P - 1, 0), np.stack([e, wbits[:, 7], d], axis=1))
        else:
            b.add_gates((0, 0, 1, 0, 0), np.stack([e, wbits[:, k], e], axis=1))
    # len = start + width - sum(e)
    esum = int(e[0])
    if width > 1:
        chain = b.new_slots(width - 1)
        b.add_gates(_ADD, np.stack([np.concatenate([e[:1], chain[:-1]]), e[1:], chain], axis=1), defines=True)
        esum = int(chain[-1])
    length = b.new_slot()
    b.add_gate((0, -1, 0, -1, start + width), (esum, esum, length), defines=True)
    # length field: big-endian bit count in the last 8 bytes, top byte zero
    tail = flat[-8:]
    b.add_gates((1, 0, 0, 0, 0), np.stack([tail[0], tail[0], tail[0]], axis=1))
    field_bits = np.concatenate([tail[7 - q] for q in range(7)])  # LSB-first over the low 7 bytes
    value = g.pack(field_bits)
    b.add_gate((1, -8, 0, 0, 0), (value, length, length))

    for wd in state:
        b.add_public(wd.packed)
    b.add_public(length)
    circuit = b.finalize()
    return Sha256Layout(circuit, num_blocks, msg_bits, np.array([wd.packed for wd in state], dtype=np.int64),
                        int(length), start, e)


def generate_witness(layout: Sha256Layout, message: bytes) -> tuple[Witness, list[int]]:
    message = bytes(message)
    padded = pad_message(message)
    if len(padded.blocks) != layout.num_blocks:
        raise CircuitError(f"message needs {len(padded.blocks)} blocks, circuit has {layout.num_blocks}")
    circuit = layout.circuit
    values = np.zeros(circuit.num_slots, dtype=np.uint64)
    raw = np.frombuffer(padded.data, dtype=np.uint8)
    bits = ((raw[:, None] >> np.arange(8, dtype=np.uint8)) & 1).astype(np.uint64)
    values[layout.message_bit_slots.reshape(-1)] = bits.reshape(-1)
    positions = layout.window_start + np.arange(len(layout.window_slots))
    values[layout.window_slots] = (positions >= len(message)).astype(np.uint64)
    circuit.program.run(circuit, values)
    publics = digest_words(digest(message).value) + [len(message)]
    return Witness(values), publics


def witness_digest(layout: Sha256Layout, witness: Witness) -> bytes:
    return words_to_digest(int(witness.values[s]) for s in layout.digest_slots)


def publics_digest(publics) -> bytes:
    """Digest bytes encoded by the first eight public inputs."""
    return words_to_digest(publics[:8])
