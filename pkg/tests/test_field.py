import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zksha256 import field as F
from zksha256.field import P, EvaluationDomain, ExtFieldElement, FieldElement, FieldError

felt = st.integers(min_value=0, max_value=P - 1)
nonzero = st.integers(min_value=1, max_value=P - 1)


def test_modulus_shape():
    assert P == 2**64 - 2**32 + 1 == 18446744069414584321
    assert (P - 1) % (1 << 32) == 0 and ((P - 1) >> 32) % 2 == 1


def test_add_examples():
    assert F.add(P - 1, 1) == 0
    assert F.add(2**63, 2**63) == 4294967295
    assert (FieldElement(P - 1) + 1).value == 0


@given(felt)
def test_additive_identity(x):
    assert F.add(x, 0) == x
    assert FieldElement(x) + FieldElement(0) == FieldElement(x)


def test_mul_examples():
    assert F.mul(P - 1, P - 1) == 1
    assert F.mul(2**32, 2**32) == 4294967295
    assert (FieldElement(2**32) * FieldElement(2**32)).value == 4294967295


@given(felt)
def test_mul_identity(x):
    assert F.mul(x, 1) == x


def test_inverse_examples():
    assert F.inverse(1) == 1
    assert F.inverse(2) == 9223372034707292161
    assert 2 * 9223372034707292161 % P == 1
    with pytest.raises(FieldError):
        F.inverse(0)
    with pytest.raises(FieldError):
        FieldElement(0).inverse()


@settings(max_examples=1000)
@given(felt, felt, felt)
def test_distributivity(a, b, c):
    A, B, C = FieldElement(a), FieldElement(b), FieldElement(c)
    assert A * (B + C) == A * B + A * C
    assert (a * ((b + c) % P)) % P == (A * (B + C)).value


@given(nonzero)
def test_fermat(a):
    assert FieldElement(a) ** (P - 1) == FieldElement(1)


@given(felt, felt)
def test_commutative(a, b):
    assert FieldElement(a) + FieldElement(b) == FieldElement(b) + FieldElement(a)
    assert FieldElement(a) * FieldElement(b) == FieldElement(b) * FieldElement(a)


@given(felt, felt, felt)
def test_associative(a, b, c):
    A, B, C = FieldElement(a), FieldElement(b), FieldElement(c)
    assert (A * B) * C == A * (B * C)
    assert (A + B) + C == A + (B + C)


def test_canonical_and_bytes():
    assert FieldElement(P).value == 0
    assert FieldElement(-1).value == P - 1
    x = FieldElement(123456789)
    assert x.to_bytes() == (123456789).to_bytes(8, "little")
    assert FieldElement.from_bytes(x.to_bytes()) == x
    with pytest.raises(FieldError):
        FieldElement.from_bytes((P).to_bytes(8, "little"))


def test_seven_is_non_residue():
    assert pow(7, (P - 1) // 2, P) == P - 1


@given(felt, felt, felt, felt)
def test_ext_mul_rule(a0, a1, b0, b1):
    x, y = ExtFieldElement(a0, a1), ExtFieldElement(b0, b1)
    z = x * y
    assert z.c0 == (a0 * b0 + 7 * a1 * b1) % P
    assert z.c1 == (a0 * b1 + a1 * b0) % P


@given(felt, felt)
def test_ext_embedding_homomorphism(a, b):
    assert ExtFieldElement(a) * ExtFieldElement(b) == ExtFieldElement(a * b % P)
    assert ExtFieldElement(a) + ExtFieldElement(b) == ExtFieldElement((a + b) % P)


@given(felt, felt)
def test_ext_inverse(c0, c1):
    x = ExtFieldElement(c0, c1)
    if x.is_zero():
        with pytest.raises(FieldError):
            x.inverse()
    else:
        assert x * x.inverse() == ExtFieldElement(1)


def test_ext_bytes_roundtrip():
    x = ExtFieldElement(5, P - 3)
    assert x.to_bytes() == (5).to_bytes(8, "little") + (P - 3).to_bytes(8, "little")
    assert ExtFieldElement.from_bytes(x.to_bytes()) == x


@pytest.mark.parametrize("k", [0, 1, 5, 16, 32])
def test_domain_generator_order(k):
    d = EvaluationDomain(k)
    g = d.generator.value
    assert pow(g, 1 << k, P) == 1
    if k:
        assert pow(g, 1 << (k - 1), P) != 1


def test_domain_bounds():
    with pytest.raises(FieldError):
        EvaluationDomain(33)
    with pytest.raises(FieldError):
        F.root_of_unity(33)


def test_ntt_constant():
    d = EvaluationDomain(4)
    out = F.ntt([FieldElement(9)] + [FieldElement(0)] * 15, d)
    assert out == [FieldElement(9)] * 16


def test_ntt_size_two():
    d = EvaluationDomain(1)
    c0, c1 = 11, P - 5
    out = F.ntt(np.array([c0, c1], dtype=np.uint64), d)
    assert [int(v) for v in out] == [(c0 + c1) % P, (c0 - c1) % P]


@pytest.mark.parametrize("shift", [1, 7])
def test_ntt_matches_naive(shift):
    rng = random.Random(3)
    k = 6
    v = [rng.randrange(P) for _ in range(1 << k)]
    d = EvaluationDomain(k, shift)
    ev = F.ntt(np.array(v, dtype=np.uint64), d)
    for i in range(1 << k):
        x = d.element(i)
        assert int(ev[i]) == sum(c * pow(x, j, P) for j, c in enumerate(v)) % P


@pytest.mark.parametrize("k", range(1, 17))
def test_ntt_roundtrip(k):
    rng = np.random.default_rng(k)
    v = rng.integers(0, P, 1 << k, dtype=np.uint64)
    for shift in (1, 7):
        d = EvaluationDomain(k, shift)
        assert np.array_equal(F.ntt(F.ntt(v, d), d, "inverse"), v)


def test_ntt_length_mismatch():
    with pytest.raises(FieldError):
        F.ntt(np.zeros(8, dtype=np.uint64), EvaluationDomain(4))


def test_batch_inverse():
    rng = np.random.default_rng(1)
    a = rng.integers(1, P, 1000, dtype=np.uint64)
    inv = F.batch_inverse(a)
    assert all(int(x) * int(y) % P == 1 for x, y in zip(a[:50], inv[:50]))
