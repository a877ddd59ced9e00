"""Fiat-Shamir transcript over a SHA-256 chain."""
from __future__ import annotations

import hashlib
import struct

from ..field import P, ExtFieldElement


class Transcript:
    """Running hash state; every absorb and squeeze advances it.

    state_{i+1} = SHA-256(state_i || op || counter || len(label) || label || len(data) || data)
    """

    def __init__(self, domain_tag: bytes):
        self.state = hashlib.sha256(b"zksha256/transcript" + struct.pack("<Q", len(domain_tag)) + domain_tag).digest()
        self.counter = 0

    def _step(self, op: bytes, label: bytes, data: bytes) -> bytes:
        h = hashlib.sha256(self.state)
        h.update(op + struct.pack("<QQ", self.counter, len(label)) + label)
        h.update(struct.pack("<Q", len(data)))
        h.update(data)
        self.state = h.digest()
        self.counter += 1
        return self.state

    def absorb(self, label: bytes, data: bytes) -> None:
        self._step(b"A", label, bytes(data))

    def squeeze_bytes(self, label: bytes) -> bytes:
        return self._step(b"S", label, b"")

    def challenge_ext(self, label: bytes) -> ExtFieldElement:
        # 16 bytes per coordinate reduced mod p; bias is below 2^-64
        out = self.squeeze_bytes(label)
        return ExtFieldElement(int.from_bytes(out[:16], "little") % P, int.from_bytes(out[16:], "little") % P)

    def challenge_indices(self, label: bytes, count: int, bound: int) -> list[int]:
        """``count`` indices in [0, bound); bound is a power of two, so masking is unbiased."""
        if bound <= 0 or bound & (bound - 1):
            raise ValueError("index bound must be a power of two")
        out = []
        while len(out) < count:
            block = self.squeeze_bytes(label)
            for i in range(0, 32, 8):
                if len(out) < count:
                    out.append(int.from_bytes(block[i:i + 8], "little") & (bound - 1))
        return out
