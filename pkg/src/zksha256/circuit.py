"""PLONK-style constraint system over three routed wires.

Each row enforces  q_l*a + q_r*b + q_m*a*b + q_o*c + q_c = 0  on the values of
its wire slots.  A slot may appear at many positions; positions that share a
slot, or whose slots were joined by ``connect``, form one cycle of the copy
permutation sigma.

Rows flagged as *defining* (q_o = -1) also serve the witness program: they
compute c from a and b.  Hints decompose a linear combination of slot values
into bits; they run before the row they are attached to.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Iterable, Sequence

import numba as nb
import numpy as np

from . import _kernels as K
from .field import P, FieldElement

NEG_ONE = P - 1


class CircuitError(Exception):
    pass


class BuilderStateError(CircuitError):
    pass


class UnknownSlotError(CircuitError):
    pass


def to_field_array(values) -> np.ndarray:
    """Signed Python ints (or an int array) -> canonical uint64."""
    arr = np.asarray(values, dtype=object) if not isinstance(values, np.ndarray) else values
    if arr.dtype == np.uint64:
        return arr
    if arr.dtype == object:
        return np.array([int(v) % P for v in arr.ravel()], dtype=np.uint64).reshape(arr.shape)
    arr = arr.astype(np.int64)
    out = arr.astype(np.uint64)
    neg = arr < 0
    out[neg] = np.uint64(P) - (-arr[neg]).astype(np.uint64)
    return out


@dataclass(frozen=True)
class GateRow:
    q_l: int
    q_r: int
    q_m: int
    q_o: int
    q_c: int
    a: int
    b: int
    c: int


class Witness:
    """Assignment slot -> field value, stored densely."""

    def __init__(self, values: np.ndarray, assigned: np.ndarray | None = None):
        self.values = np.asarray(values, dtype=np.uint64)
        self.assigned = assigned

    @classmethod
    def from_mapping(cls, mapping: dict, num_slots: int) -> "Witness":
        values = np.zeros(num_slots, dtype=np.uint64)
        assigned = np.zeros(num_slots, dtype=bool)
        for slot, v in mapping.items():
            if not 0 <= slot < num_slots:
                raise UnknownSlotError(f"slot {slot} out of range")
            values[slot] = int(v) % P
            assigned[slot] = True
        return cls(values, assigned)

    def __getitem__(self, slot: int) -> FieldElement:
        return FieldElement(int(self.values[slot]))

    def copy(self) -> "Witness":
        return Witness(self.values.copy(), None if self.assigned is None else self.assigned.copy())


class CircuitBuilder:
    def __init__(self):
        self._sel: list[np.ndarray] = []
        self._wires: list[np.ndarray] = []
        self._defines: list[np.ndarray] = []
        self.num_rows = 0
        self.num_slots = 0
        self._parent: dict[int, int] = {}
        self._public_slots: list[int] = []
        self._public_rows: list[int] = []
        self._hints: list[_HintChunk] = []
        self.finalized = False

    # -- slots
    def new_slot(self) -> int:
        self._check_open()
        self.num_slots += 1
        return self.num_slots - 1

    def new_slots(self, k: int) -> np.ndarray:
        self._check_open()
        out = np.arange(self.num_slots, self.num_slots + k, dtype=np.int64)
        self.num_slots += k
        return out

    def _check_open(self):
        if self.finalized:
            raise BuilderStateError("builder already finalized")

    def _check_slots(self, slots: np.ndarray):
        if slots.size and (slots.min() < 0 or slots.max() >= self.num_slots):
            raise UnknownSlotError("wire references an unregistered slot")

    # -- gates
    def add_gate(self, selectors: Sequence[int], wires: Sequence[int], defines: bool = False) -> int:
        return self.add_gates(np.asarray([to_field_array(list(selectors))]),
                              np.asarray([list(wires)], dtype=np.int64), defines)

    def add_gates(self, selectors, wires, defines=False) -> int:
        """Append k rows at once.

        ``selectors`` is (5,) or (k, 5); ``wires`` is (k, 3); ``defines`` is a
        flag or a length-k boolean array.
        """
        self._check_open()
        wires = np.asarray(wires, dtype=np.int64)
        if wires.ndim != 2 or wires.shape[1] != 3:
            raise CircuitError("wires must have shape (k, 3)")
        k = wires.shape[0]
        sel = to_field_array(selectors)
        if sel.ndim == 1:
            sel = np.broadcast_to(sel, (k, 5))
        if sel.shape != (k, 5):
            raise CircuitError("selectors must have shape (5,) or (k, 5)")
        defines = np.broadcast_to(np.asarray(defines, dtype=bool), (k,))
        self._check_slots(wires)
        if np.any(sel[defines, 3] != np.uint64(NEG_ONE)):
            raise CircuitError("defining rows need q_o = -1")
        first = self.num_rows
        self._sel.append(np.ascontiguousarray(sel))
        self._wires.append(wires)
        self._defines.append(np.array(defines))
        self.num_rows += k
        return first

    def connect(self, s1: int, s2: int) -> None:
        self._check_open()
        for s in (s1, s2):
            if not 0 <= s < self.num_slots:
                raise UnknownSlotError(f"slot {s} is not registered")
        r1, r2 = self._find(s1), self._find(s2)
        if r1 != r2:
            lo, hi = min(r1, r2), max(r1, r2)
            self._parent[hi] = lo

    def _find(self, s: int) -> int:
        path = []
        while s in self._parent:
            path.append(s)
            s = self._parent[s]
        for x in path:
            self._parent[x] = s
        return s

    def add_public(self, slot: int) -> int:
        """Expose ``slot`` as the next public input; returns its index."""
        row = self.add_gate((1, 0, 0, 0, 0), (slot, slot, slot))
        self._public_slots.append(int(slot))
        self._public_rows.append(row)
        return len(self._public_slots) - 1

    def add_hint(self, targets, terms: Iterable[tuple[int, int]] = (), const: int = 0) -> None:
        """Before the next row: write bits of (const + sum coeff*value) into ``targets`` (LSB first)."""
        self._check_open()
        targets = np.asarray(targets, dtype=np.int64)
        terms = list(terms)
        slots = np.array([t[0] for t in terms], dtype=np.int64)
        coeffs = to_field_array([t[1] for t in terms]) if terms else np.zeros(0, dtype=np.uint64)
        self._check_slots(targets)
        self._check_slots(slots)
        self._hints.append(_HintChunk(
            np.array([self.num_rows], dtype=np.int64), _ptr([len(targets)]), targets,
            _ptr([len(slots)]), slots, coeffs, np.array([int(const) % P], dtype=np.uint64)))

    def _add_hint_chunk(self, chunk: "_HintChunk") -> None:
        self._hints.append(chunk)

    # -- finalize
    def finalize(self) -> "Circuit":
        self._check_open()
        if self.num_rows == 0:
            raise CircuitError("cannot finalize an empty circuit")
        gate_count = self.num_rows
        n = 1 << (gate_count - 1).bit_length()
        pad = n - gate_count
        pad_slots = self.new_slots(pad)
        sel = np.zeros((n, 5), dtype=np.uint64)
        sel[:gate_count] = np.concatenate(self._sel)
        wires = np.empty((n, 3), dtype=np.int64)
        wires[:gate_count] = np.concatenate(self._wires)
        wires[gate_count:] = pad_slots[:, None]
        defines = np.zeros(n, dtype=bool)
        defines[:gate_count] = np.concatenate(self._defines)
        self._sel = self._wires = self._defines = []

        roots = np.arange(self.num_slots, dtype=np.int64)
        for s in list(self._parent):
            roots[s] = self._find(s)

        program = WitnessProgram.from_chunks(defines, self._hints)
        self.finalized = True
        return Circuit(
            selectors=sel,
            wires=wires,
            roots=roots,
            public_slots=np.array(self._public_slots, dtype=np.int64),
            public_rows=np.array(self._public_rows, dtype=np.int64),
            gate_count=gate_count,
            program=program,
        )


@dataclass
class _HintChunk:
    rows: np.ndarray
    target_ptr: np.ndarray
    targets: np.ndarray
    term_ptr: np.ndarray
    term_slots: np.ndarray
    term_coeffs: np.ndarray
    consts: np.ndarray


class Template:
    """A recorded sub-circuit replayed with a slot remapping.

    Record with a fresh builder whose first ``num_external`` slots stand for
    the interface; every later slot is internal and gets fresh ids on each
    instantiation.
    """

    def __init__(self, builder: CircuitBuilder, num_external: int):
        self.num_external = num_external
        self.num_internal = builder.num_slots - num_external
        self.selectors = np.concatenate(builder._sel)
        self.wires = np.concatenate(builder._wires)
        self.defines = np.concatenate(builder._defines)
        h = WitnessProgram.from_chunks(self.defines, builder._hints)
        self.hints = _HintChunk(h.hint_rows, h.target_ptr, h.targets, h.term_ptr,
                                h.term_slots, h.term_coeffs, h.consts)
        self.num_rows = self.selectors.shape[0]

    def instantiate(self, builder: CircuitBuilder, external: np.ndarray) -> np.ndarray:
        """Replay into ``builder``; returns the template-id -> slot map."""
        external = np.asarray(external, dtype=np.int64)
        if external.shape != (self.num_external,):
            raise CircuitError("wrong number of interface slots")
        builder._check_open()
        builder._check_slots(external)
        remap = np.concatenate([external, builder.new_slots(self.num_internal)])
        base = builder.num_rows
        h = self.hints
        builder._add_hint_chunk(_HintChunk(h.rows + base, h.target_ptr, remap[h.targets],
                                           h.term_ptr, remap[h.term_slots], h.term_coeffs, h.consts))
        builder._sel.append(self.selectors)
        builder._wires.append(remap[self.wires])
        builder._defines.append(self.defines)
        builder.num_rows += self.num_rows
        return remap


def _ptr(lengths):
    out = np.zeros(len(lengths) + 1, dtype=np.int64)
    np.cumsum(lengths, out=out[1:])
    return out


def _join_ptrs(ptrs):
    out = [np.zeros(1, dtype=np.int64)]
    off = 0
    for p in ptrs:
        out.append(p[1:] + off)
        off += int(p[-1])
    return np.concatenate(out)


@dataclass
class WitnessProgram:
    defines: np.ndarray
    hint_rows: np.ndarray
    target_ptr: np.ndarray
    targets: np.ndarray
    term_ptr: np.ndarray
    term_slots: np.ndarray
    term_coeffs: np.ndarray
    consts: np.ndarray

    @classmethod
    def from_chunks(cls, defines: np.ndarray, chunks: list) -> "WitnessProgram":
        if not chunks:
            z = np.zeros(0, dtype=np.int64)
            return cls(defines, z, np.zeros(1, dtype=np.int64), z, np.zeros(1, dtype=np.int64), z,
                       np.zeros(0, dtype=np.uint64), np.zeros(0, dtype=np.uint64))
        return cls(
            defines=defines,
            hint_rows=np.concatenate([c.rows for c in chunks]),
            target_ptr=_join_ptrs([c.target_ptr for c in chunks]),
            targets=np.concatenate([c.targets for c in chunks]),
            term_ptr=_join_ptrs([c.term_ptr for c in chunks]),
            term_slots=np.concatenate([c.term_slots for c in chunks]),
            term_coeffs=np.concatenate([c.term_coeffs for c in chunks]),
            consts=np.concatenate([c.consts for c in chunks]),
        )

    def run(self, circuit: "Circuit", values: np.ndarray) -> None:
        """Fill computed slots in ``values`` (inputs must already be set)."""
        _run_program(values, circuit.selectors, circuit.wires, self.defines, self.hint_rows,
                     self.target_ptr, self.targets, self.term_ptr, self.term_slots,
                     self.term_coeffs, self.consts)


@nb.njit(nogil=True, cache=True)
def _exec_hint(values, h, target_ptr, targets, term_ptr, term_slots, term_coeffs, consts):
    v = consts[h]
    for t in range(term_ptr[h], term_ptr[h + 1]):
        v = K.addmod(v, K.mulmod(term_coeffs[t], values[term_slots[t]]))
    for j in range(target_ptr[h], target_ptr[h + 1]):
        values[targets[j]] = v & np.uint64(1)
        v >>= np.uint64(1)


@nb.njit(nogil=True, cache=True)
def _run_program(values, sel, wires, defines, hint_rows, target_ptr, targets,
                 term_ptr, term_slots, term_coeffs, consts):
    h = 0
    nh = hint_rows.shape[0]
    for r in range(sel.shape[0]):
        while h < nh and hint_rows[h] == r:
            _exec_hint(values, h, target_ptr, targets, term_ptr, term_slots, term_coeffs, consts)
            h += 1
        if defines[r]:
            a = values[wires[r, 0]]
            b = values[wires[r, 1]]
            v = K.addmod(K.mulmod(sel[r, 0], a), K.mulmod(sel[r, 1], b))
            v = K.addmod(v, K.mulmod(sel[r, 2], K.mulmod(a, b)))
            values[wires[r, 2]] = K.addmod(v, sel[r, 4])
    while h < nh:
        _exec_hint(values, h, target_ptr, targets, term_ptr, term_slots, term_coeffs, consts)
        h += 1


@nb.njit(nogil=True, cache=True)
def _gate_residuals_ok(values, sel, wires, pi):
    for r in range(sel.shape[0]):
        a = values[wires[r, 0]]
        b = values[wires[r, 1]]
        c = values[wires[r, 2]]
        v = K.addmod(K.mulmod(sel[r, 0], a), K.mulmod(sel[r, 1], b))
        v = K.addmod(v, K.mulmod(sel[r, 2], K.mulmod(a, b)))
        v = K.addmod(v, K.mulmod(sel[r, 3], c))
        v = K.addmod(v, sel[r, 4])
        v = K.addmod(v, pi[r])
        if v != K.ZERO:
            return False
    return True


@nb.njit(nogil=True, cache=True)
def _cycles(keys, num_keys):
    """Copy permutation: positions sharing a key form one cycle in position order."""
    m = keys.shape[0]
    count = np.zeros(num_keys + 1, dtype=np.int64)
    for i in range(m):
        count[keys[i] + 1] += 1
    for k in range(num_keys):
        count[k + 1] += count[k]
    start = count[:num_keys].copy()
    order = np.empty(m, dtype=np.int64)
    fill = count[:num_keys].copy()
    for i in range(m):
        k = keys[i]
        order[fill[k]] = i
        fill[k] += 1
    sigma = np.empty(m, dtype=np.int64)
    for k in range(num_keys):
        lo = start[k]
        hi = fill[k]
        for j in range(lo, hi - 1):
            sigma[order[j]] = order[j + 1]
        if hi > lo:
            sigma[order[hi - 1]] = order[lo]
    return sigma


class Circuit:
    """Finalized, immutable circuit."""

    def __init__(self, selectors, wires, roots, public_slots, public_rows, gate_count, program):
        self.selectors = selectors
        self.wires = wires
        self.roots = roots
        self.public_slots = public_slots
        self.public_rows = public_rows
        self._gate_count = int(gate_count)
        self.program = program
        self.n = selectors.shape[0]
        self.log_n = self.n.bit_length() - 1
        self.num_slots = roots.shape[0]
        # positions are column-major: pos = column * n + row
        self.sigma = _cycles(np.ascontiguousarray(roots[wires.T.reshape(-1)]), self.num_slots)
        for arr in (selectors, wires, roots, public_slots, public_rows, self.sigma):
            arr.setflags(write=False)
        self._digest = None

    def gate_count(self) -> int:
        return self._gate_count

    @property
    def num_publics(self) -> int:
        return len(self.public_slots)

    def row(self, i: int) -> GateRow:
        s = [int(x) for x in self.selectors[i]]
        w = [int(x) for x in self.wires[i]]
        return GateRow(*s, *w)

    def public_input_column(self, publics) -> np.ndarray:
        """Per-row public contribution: -publics[i] at public row i, zero elsewhere."""
        pi = np.zeros(self.n, dtype=np.uint64)
        for row, v in zip(self.public_rows, publics):
            pi[row] = (-int(v)) % P
        return pi

    def padding_slots(self) -> np.ndarray:
        return self.wires[self._gate_count:, 0].copy()

    # -- canonical bytes
    def _canonical_parts(self):
        yield struct.pack("<QQQQ", self.n, self._gate_count, self.num_slots, self.num_publics)
        yield self.selectors.astype("<u8").tobytes()
        yield self.wires.astype("<u8").tobytes()
        yield self.roots.astype("<u8").tobytes()
        yield self.public_slots.astype("<u8").tobytes()
        yield self.public_rows.astype("<u8").tobytes()

    def digest(self) -> bytes:
        if self._digest is None:
            h = hashlib.sha256(b"zksha256/circuit")
            for part in self._canonical_parts():
                h.update(part)
            self._digest = h.digest()
        return self._digest

    def to_bytes(self) -> bytes:
        out = bytearray()
        for part in self._canonical_parts():
            out += part
        pg = self.program
        for arr in (pg.defines.astype(np.uint8), pg.hint_rows, pg.target_ptr, pg.targets,
                    pg.term_ptr, pg.term_slots, pg.term_coeffs, pg.consts):
            data = np.ascontiguousarray(arr).astype(arr.dtype.newbyteorder("<")).tobytes()
            out += struct.pack("<Q", len(data)) + data
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Circuit":
        r = _Reader(data)
        n, gate_count, num_slots, num_pub = r.unpack("<QQQQ")
        if n == 0 or n & (n - 1) or not 0 < gate_count <= n or num_slots == 0:
            raise CircuitError("inconsistent circuit header")
        sel = r.array(np.uint64, n * 5).reshape(n, 5)
        if np.any(sel >= np.uint64(P)):
            raise CircuitError("non-canonical selector")
        wires = r.array(np.int64, n * 3).reshape(n, 3)
        roots = r.array(np.int64, num_slots)
        pub_slots = r.array(np.int64, num_pub)
        pub_rows = r.array(np.int64, num_pub)
        for arr, bound in ((wires, num_slots), (roots, num_slots), (pub_slots, num_slots), (pub_rows, n)):
            if arr.size and (arr.min() < 0 or arr.max() >= bound):
                raise CircuitError("index out of range")
        parts = [r.prefixed(dt) for dt in (np.uint8, np.int64, np.int64, np.int64,
                                          np.int64, np.int64, np.uint64, np.uint64)]
        r.done()
        program = WitnessProgram(parts[0].astype(bool), *parts[1:])
        return cls(sel, wires, roots, pub_slots, pub_rows, gate_count, program)


class _Reader:
    def __init__(self, data: bytes):
        self.data = memoryview(data)
        self.off = 0

    def take(self, k: int) -> memoryview:
        if k < 0 or self.off + k > len(self.data):
            raise CircuitError("truncated circuit encoding")
        out = self.data[self.off:self.off + k]
        self.off += k
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def array(self, dtype, count: int) -> np.ndarray:
        dt = np.dtype(dtype).newbyteorder("<")
        return np.frombuffer(self.take(count * dt.itemsize), dtype=dt).astype(dtype)

    def prefixed(self, dtype) -> np.ndarray:
        (length,) = self.unpack("<Q")
        dt = np.dtype(dtype)
        if length % dt.itemsize:
            raise CircuitError("misaligned array")
        return self.array(dtype, length // dt.itemsize)

    def done(self):
        if self.off != len(self.data):
            raise CircuitError("trailing bytes in circuit encoding")


def check_witness(circuit: Circuit, witness: Witness, publics: Sequence) -> bool:
    """Naive satisfaction oracle: gates, copy classes and public values."""
    values = witness.values
    if values.shape[0] < circuit.num_slots:
        return False
    if witness.assigned is not None:
        assigned = witness.assigned
        if assigned.shape[0] < circuit.num_slots:
            return False
        # padding rows hold fresh slots no user mapping can name; only real rows need assignments
        if not assigned[circuit.wires[:circuit.gate_count()].reshape(-1)].all():
            return False
    values = np.ascontiguousarray(values[:circuit.num_slots])
    if np.any(values >= np.uint64(P)):
        return False
    pubs = [int(v) for v in publics]
    if len(pubs) != circuit.num_publics or any(not 0 <= v < P for v in pubs):
        return False
    if any(int(values[s]) != v for s, v in zip(circuit.public_slots, pubs)):
        return False
    if not np.array_equal(values, values[circuit.roots]):
        return False
    return bool(_gate_residuals_ok(values, circuit.selectors, circuit.wires,
                                   circuit.public_input_column(pubs)))
