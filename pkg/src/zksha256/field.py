"""Goldilocks prime field, its quadratic extension, and power-of-two NTTs."""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels as K

P = K.P_INT
TWO_ADICITY = 32
MULTIPLICATIVE_GENERATOR = 7
COSET_SHIFT = 7
NON_RESIDUE = 7  # phi^2 = 7 defines the extension
INV2 = (P + 1) // 2


class FieldError(ValueError):
    pass


def add(a: int, b: int) -> int:
    return (a + b) % P


def sub(a: int, b: int) -> int:
    return (a - b) % P


def mul(a: int, b: int) -> int:
    return (a * b) % P


def inverse(a: int) -> int:
    a %= P
    if a == 0:
        raise FieldError("zero has no inverse")
    return pow(a, P - 2, P)


def root_of_unity(log_size: int) -> int:
    if not 0 <= log_size <= TWO_ADICITY:
        raise FieldError(f"no subgroup of size 2^{log_size}")
    return pow(MULTIPLICATIVE_GENERATOR, (P - 1) >> log_size, P)


class FieldElement:
    """Immutable element of F_p with canonical value in [0, p)."""

    __slots__ = ("value",)

    def __init__(self, value: int = 0):
        object.__setattr__(self, "value", int(value) % P)

    def __setattr__(self, name, value):
        raise AttributeError("FieldElement is immutable")

    @staticmethod
    def _v(other) -> int:
        if isinstance(other, FieldElement):
            return other.value
        if isinstance(other, (int, np.integer)):
            return int(other) % P
        return NotImplemented

    def __add__(self, other):
        o = self._v(other)
        return NotImplemented if o is NotImplemented else FieldElement(self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._v(other)
        return NotImplemented if o is NotImplemented else FieldElement(self.value - o)

    def __rsub__(self, other):
        o = self._v(other)
        return NotImplemented if o is NotImplemented else FieldElement(o - self.value)

    def __mul__(self, other):
        o = self._v(other)
        return NotImplemented if o is NotImplemented else FieldElement(self.value * o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._v(other)
        return NotImplemented if o is NotImplemented else FieldElement(self.value * inverse(o))

    def __neg__(self):
        return FieldElement(-self.value)

    def __pow__(self, e: int):
        if e < 0:
            return FieldElement(pow(inverse(self.value), -e, P))
        return FieldElement(pow(self.value, e, P))

    def inverse(self) -> "FieldElement":
        return FieldElement(inverse(self.value))

    def __eq__(self, other):
        o = self._v(other)
        return NotImplemented if o is NotImplemented else self.value == o

    def __hash__(self):
        return hash(self.value)

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"FieldElement({self.value})"

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(8, "little")

    @classmethod
    def from_bytes(cls, data: bytes) -> "FieldElement":
        if len(data) != 8:
            raise FieldError("field element encoding is 8 bytes")
        v = int.from_bytes(data, "little")
        if v >= P:
            raise FieldError("non-canonical field element")
        return cls(v)


class ExtFieldElement:
    """c0 + c1*phi with phi^2 = 7."""

    __slots__ = ("c0", "c1")

    def __init__(self, c0=0, c1=0):
        object.__setattr__(self, "c0", int(c0) % P)
        object.__setattr__(self, "c1", int(c1) % P)

    def __setattr__(self, name, value):
        raise AttributeError("ExtFieldElement is immutable")

    @staticmethod
    def lift(x) -> "ExtFieldElement":
        if isinstance(x, ExtFieldElement):
            return x
        if isinstance(x, FieldElement):
            return ExtFieldElement(x.value, 0)
        if isinstance(x, (int, np.integer)):
            return ExtFieldElement(int(x), 0)
        raise TypeError(f"cannot lift {type(x).__name__}")

    def __add__(self, other):
        o = self.lift(other)
        return ExtFieldElement(self.c0 + o.c0, self.c1 + o.c1)

    __radd__ = __add__

    def __sub__(self, other):
        o = self.lift(other)
        return ExtFieldElement(self.c0 - o.c0, self.c1 - o.c1)

    def __rsub__(self, other):
        return self.lift(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, np.integer, FieldElement)):
            s = int(other) % P
            return ExtFieldElement(self.c0 * s, self.c1 * s)
        o = self.lift(other)
        return ExtFieldElement(
            self.c0 * o.c0 + NON_RESIDUE * self.c1 * o.c1,
            self.c0 * o.c1 + self.c1 * o.c0,
        )

    __rmul__ = __mul__

    def __neg__(self):
        return ExtFieldElement(-self.c0, -self.c1)

    def norm(self) -> int:
        return (self.c0 * self.c0 - NON_RESIDUE * self.c1 * self.c1) % P

    def inverse(self) -> "ExtFieldElement":
        n = self.norm()
        if n == 0:
            raise FieldError("zero has no inverse")
        ni = inverse(n)
        return ExtFieldElement(self.c0 * ni, -self.c1 * ni)

    def __truediv__(self, other):
        return self * self.lift(other).inverse()

    def __rtruediv__(self, other):
        return self.lift(other) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = ExtFieldElement(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        try:
            o = self.lift(other)
        except TypeError:
            return NotImplemented
        return self.c0 == o.c0 and self.c1 == o.c1

    def __hash__(self):
        return hash((self.c0, self.c1))

    def is_zero(self) -> bool:
        return self.c0 == 0 and self.c1 == 0

    def __repr__(self):
        return f"ExtFieldElement({self.c0}, {self.c1})"

    def to_bytes(self) -> bytes:
        return self.c0.to_bytes(8, "little") + self.c1.to_bytes(8, "little")

    @classmethod
    def from_bytes(cls, data: bytes) -> "ExtFieldElement":
        if len(data) != 16:
            raise FieldError("extension element encoding is 16 bytes")
        c0 = int.from_bytes(data[:8], "little")
        c1 = int.from_bytes(data[8:], "little")
        if c0 >= P or c1 >= P:
            raise FieldError("non-canonical field element")
        return cls(c0, c1)


@dataclass(frozen=True)
class EvaluationDomain:
    """Multiplicative subgroup of size 2^log_size, optionally shifted to a coset."""

    log_size: int
    coset_shift: int = 1

    def __post_init__(self):
        if not 0 <= self.log_size <= TWO_ADICITY:
            raise FieldError(f"log_size must be in [0, {TWO_ADICITY}]")
        object.__setattr__(self, "coset_shift", int(self.coset_shift) % P)
        if self.coset_shift == 0:
            raise FieldError("coset shift must be nonzero")

    @property
    def size(self) -> int:
        return 1 << self.log_size

    @property
    def generator(self) -> FieldElement:
        return FieldElement(root_of_unity(self.log_size))

    def element(self, i: int) -> int:
        return self.coset_shift * pow(self.generator.value, i, P) % P

    def elements(self) -> np.ndarray:
        out = np.empty(self.size, dtype=np.uint64)
        K.geometric(np.uint64(self.coset_shift), np.uint64(self.generator.value), out)
        return out


# ---------------------------------------------------------------- twiddle cache

class _Twiddles:
    """Shared twiddle tables; tw[m + t] = w_{2m}^t is independent of n."""

    def __init__(self, inverse: bool):
        self.inverse = inverse
        self.table = np.ones(2, dtype=np.uint64)
        self.log = 1
        self.lock = threading.Lock()

    def get(self, log_n: int) -> np.ndarray:
        if log_n <= self.log:
            return self.table
        with self.lock:
            if log_n > self.log:
                root = root_of_unity(log_n)
                if self.inverse:
                    root = inverse(root)
                tw = np.empty(1 << log_n, dtype=np.uint64)
                K.fill_twiddles(np.uint64(root), log_n, tw)
                self.table = tw
                self.log = log_n
        return self.table


_FWD = _Twiddles(False)
_INV = _Twiddles(True)


def _as_array(values) -> np.ndarray:
    if isinstance(values, np.ndarray):
        if values.dtype != np.uint64:
            raise FieldError("expected uint64 array")
        return values
    return np.array([int(v) % P for v in values], dtype=np.uint64)


def _log2_exact(n: int) -> int:
    if n <= 0 or n & (n - 1):
        raise FieldError(f"length {n} is not a power of two")
    return n.bit_length() - 1


def dif_inplace(a: np.ndarray, inverse_root: bool = False) -> None:
    log_n = _log2_exact(a.shape[0])
    if log_n:
        K.dif(a, (_INV if inverse_root else _FWD).get(log_n))


def dit_inplace(a: np.ndarray, inverse_root: bool = False) -> None:
    log_n = _log2_exact(a.shape[0])
    if log_n:
        K.dit(a, (_INV if inverse_root else _FWD).get(log_n))


def interpolate_bitrev(values: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
    """Evaluations on the subgroup (natural order) -> coefficients in bit-reversed order."""
    n = values.shape[0]
    a = out if out is not None else np.empty(n, dtype=np.uint64)
    a[:] = values
    dif_inplace(a, inverse_root=True)
    if n > 1:
        K.vscale(a, np.uint64(inverse(n)), a)
    return a


def bitrev_powers(g: int, log_n: int) -> np.ndarray:
    out = np.empty(1 << log_n, dtype=np.uint64)
    K.bitrev_powers(np.uint64(g % P), log_n, out)
    return out


def coset_evaluate_bitrev(coeffs_br: np.ndarray, shift: int, out: np.ndarray | None = None) -> np.ndarray:
    """Bit-reversed coefficients -> evaluations on shift * H in natural order."""
    n = coeffs_br.shape[0]
    log_n = _log2_exact(n)
    a = out if out is not None else np.empty(n, dtype=np.uint64)
    if shift % P == 1:
        a[:] = coeffs_br
    else:
        K.vmul(coeffs_br, bitrev_powers(shift, log_n), a)
    dit_inplace(a)
    return a


def ntt(values: Sequence, domain: EvaluationDomain, direction: str = "forward"):
    """Transform between coefficient and evaluation form on ``domain``.

    Arrays come back as uint64 arrays; sequences of FieldElement come back as
    lists of FieldElement.
    """
    wrap = not isinstance(values, np.ndarray)
    a = _as_array(values).copy()
    if a.shape[0] != domain.size:
        raise FieldError(f"length {a.shape[0]} does not match domain size {domain.size}")
    s = domain.coset_shift
    if direction == "forward":
        if s != 1:
            K.vmul(a, domain_powers(s, domain.size), a)
        K.bitrev_permute(a)
        dit_inplace(a)
    elif direction == "inverse":
        K.bitrev_permute(a)
        dit_inplace(a, inverse_root=True)
        if domain.size > 1:
            K.vscale(a, np.uint64(inverse(domain.size)), a)
        if s != 1:
            K.vmul(a, domain_powers(inverse(s), domain.size), a)
    else:
        raise FieldError(f"unknown direction {direction!r}")
    if wrap:
        return [FieldElement(int(v)) for v in a]
    return a


def domain_powers(g: int, n: int) -> np.ndarray:
    out = np.empty(n, dtype=np.uint64)
    K.geometric(np.uint64(1), np.uint64(g % P), out)
    return out


def batch_inverse(a: np.ndarray) -> np.ndarray:
    out = np.empty_like(a)
    K.batch_inverse(a, out)
    return out
