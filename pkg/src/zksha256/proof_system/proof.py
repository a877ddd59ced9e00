"""Proof value and its byte encoding.

Everything is little-endian; variable-length fields carry a u64 count.  Layout:

    params | log_n | publics | wire, z, t roots | evals | fri roots | final coeffs |
    Q | openings (pre, wires, z, t, then one per FRI root)

Each opening is (width, columns, depth) followed by Q*width*columns u64 values
and Q*depth 32-byte siblings.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ..field import P
from .fri import FriProof, Opening
from .params import ParamsError, ProverParams

NUM_EVALS = 21
TRACE_TREES = ("pre", "wires", "z", "t")
TRACE_WIDTHS = (8, 3, 2, 6)


class ProofFormatError(ValueError):
    pass


@dataclass
class Proof:
    params: ProverParams
    log_n: int
    publics: np.ndarray
    wire_root: bytes
    z_root: bytes
    t_root: bytes
    evals: np.ndarray  # (21, 2)
    fri: FriProof
    trace_openings: list  # Opening per trace tree, in TRACE_TREES order

    @property
    def num_queries(self) -> int:
        return self.params.num_queries

    def to_bytes(self) -> bytes:
        out = bytearray(self.params.to_bytes())
        out += struct.pack("<Q", self.log_n)
        out += struct.pack("<Q", len(self.publics)) + np.asarray(self.publics, dtype="<u8").tobytes()
        out += self.wire_root + self.z_root + self.t_root
        out += struct.pack("<Q", self.evals.shape[0]) + self.evals.astype("<u8").tobytes()
        out += struct.pack("<Q", len(self.fri.roots)) + b"".join(self.fri.roots)
        fc = self.fri.final_coeffs
        out += struct.pack("<Q", fc.shape[0]) + fc.astype("<u8").tobytes()
        openings = list(self.trace_openings) + list(self.fri.openings)
        q = openings[0].values.shape[0] if openings else 0
        out += struct.pack("<Q", q)
        for op in openings:
            _, w, c = op.values.shape
            out += struct.pack("<QQQ", w, c, op.paths.shape[1])
            out += op.values.astype("<u8").tobytes()
            out += op.paths.tobytes()
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Proof":
        r = _Reader(data)
        try:
            params = ProverParams.from_bytes(r.take(ProverParams.SIZE))
        except ParamsError as e:
            raise ProofFormatError(str(e)) from None
        log_n = r.u64()
        if log_n > 30:
            raise ProofFormatError("trace size out of range")
        publics = r.field_vec(r.count(8))
        wire_root, z_root, t_root = r.take(32), r.take(32), r.take(32)
        n_ev = r.count(16)
        if n_ev != NUM_EVALS:
            raise ProofFormatError("wrong number of evaluations")
        evals = r.field_vec(2 * n_ev).reshape(n_ev, 2)
        fri_roots = [r.take(32) for _ in range(r.count(32))]
        n_fc = r.count(16)
        final = r.field_vec(2 * n_fc).reshape(n_fc, 2)
        q = r.u64()
        if q != params.num_queries:
            raise ProofFormatError("query count does not match parameters")
        openings = []
        for _ in range(len(TRACE_TREES) + len(fri_roots)):
            w, c, depth = r.u64(), r.u64(), r.u64()
            if not (1 <= w <= 8 and 1 <= c <= 64 and depth <= 40):
                raise ProofFormatError("opening shape out of range")
            vals = r.field_vec(q * w * c).reshape(q, w, c)
            paths = np.frombuffer(r.take(q * depth * 32), dtype=np.uint8).reshape(q, depth, 32)
            openings.append(Opening(vals, paths))
        r.done()
        nt = len(TRACE_TREES)
        return cls(params, log_n, publics, wire_root, z_root, t_root, evals,
                   FriProof(fri_roots, final, openings[nt:]), openings[:nt])


class _Reader:
    def __init__(self, data: bytes):
        self.data = memoryview(bytes(data))
        self.off = 0

    def take(self, k: int) -> bytes:
        if k < 0 or self.off + k > len(self.data):
            raise ProofFormatError("truncated proof")
        b = self.data[self.off:self.off + k]
        self.off += k
        return bytes(b)

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def count(self, item_bytes: int) -> int:
        k = self.u64()
        if k * item_bytes > len(self.data) - self.off:
            raise ProofFormatError("declared length exceeds proof size")
        return k

    def field_vec(self, k: int) -> np.ndarray:
        a = np.frombuffer(self.take(8 * k), dtype="<u8").astype(np.uint64)
        if np.any(a >= np.uint64(P)):
            raise ProofFormatError("non-canonical field element")
        return a

    def done(self) -> None:
        if self.off != len(self.data):
            raise ProofFormatError("trailing bytes after proof")
