import hashlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zksha256.field import P, FieldError, root_of_unity
from zksha256.proof_system import MerkleTree, ProverParams, commit_columns, merkle_open, merkle_verify
from zksha256.proof_system.merkle import MerkleError, leaf_hash, node_hash, verify_batch


def _naive_root(tree):
    level = [hashlib.sha256(b"\x00" + tree.leaf_bytes(i)).digest() for i in range(tree.leaf_count)]
    while len(level) > 1:
        level = [hashlib.sha256(b"\x01" + level[i] + level[i + 1]).digest() for i in range(0, len(level), 2)]
    return level[0]


def test_hash_encodings():
    assert leaf_hash(b"ab") == hashlib.sha256(b"\x00ab").digest()
    assert node_hash(b"L" * 32, b"R" * 32) == hashlib.sha256(b"\x01" + b"L" * 32 + b"R" * 32).digest()


def test_single_leaf_root():
    cols = np.arange(8, dtype=np.uint64).reshape(1, 8)
    t = MerkleTree(cols)
    assert t.leaf_count == 1 and t.depth == 0
    assert t.root == hashlib.sha256(b"\x00" + cols.astype("<u8").tobytes()).digest()


@settings(max_examples=12)
@given(st.integers(0, 12), st.integers(1, 3), st.integers(0, 2**32))
def test_open_verify_roundtrip(log_leaves, ncols, seed):
    rng = np.random.default_rng(seed)
    n = 8 << log_leaves
    t = MerkleTree(rng.integers(0, P, (ncols, n), dtype=np.uint64))
    assert t.leaf_count == 1 << log_leaves
    for leaf in {0, t.leaf_count - 1, int(rng.integers(0, t.leaf_count))}:
        path = merkle_open(t, leaf)
        assert merkle_verify(t.root, leaf, t.leaf_bytes(leaf), path)
        if path:
            swapped = list(path)
            swapped[0] = bytes(32) if swapped[0] != bytes(32) else b"\x01" * 32
            assert not merkle_verify(t.root, leaf, t.leaf_bytes(leaf), swapped)
            assert not merkle_verify(t.root, leaf ^ 1, t.leaf_bytes(leaf), path)


def test_root_matches_naive():
    rng = np.random.default_rng(2)
    t = MerkleTree(rng.integers(0, P, (3, 256), dtype=np.uint64))
    assert t.root == _naive_root(t)


def test_open_out_of_range():
    t = MerkleTree(np.zeros((1, 64), dtype=np.uint64))
    with pytest.raises(MerkleError):
        merkle_open(t, 8)
    with pytest.raises(MerkleError):
        merkle_open(t, -1)
    assert not merkle_verify(t.root, 8, t.leaf_bytes(0), t.open(0))


def test_batch_openings():
    rng = np.random.default_rng(3)
    t = MerkleTree(rng.integers(0, P, (2, 512), dtype=np.uint64))
    idx = [3, 3, 60, 0]
    vals, paths = t.open_many(idx)
    lb = vals.astype("<u8").view(np.uint8).reshape(len(idx), -1)
    assert verify_batch(t.root, idx, lb, paths)
    for q, leaf in enumerate(idx):
        assert [bytes(p) for p in paths[q]] == t.open(leaf)
    paths[1, 2, 0] ^= 1
    assert not verify_batch(t.root, idx, lb, paths)


def test_commit_columns_lde_matches_naive():
    rng = np.random.default_rng(1)
    n = 16
    cols = [rng.integers(0, P, n, dtype=np.uint64) for _ in range(2)]
    com, aux = commit_columns(cols, 4)
    w, wbig = root_of_unity(4), root_of_unity(7)
    winv, ninv = pow(w, P - 2, P), pow(n, P - 2, P)
    for c in range(2):
        vals = [int(v) for v in cols[c]]
        coef = [sum(vals[i] * pow(winv, i * k, P) for i in range(n)) * ninv % P for k in range(n)]
        for q in (0, 5, 77, 127):
            x = 7 * pow(wbig, q, P) % P
            assert sum(cf * pow(x, k, P) for k, cf in enumerate(coef)) % P == int(aux.lde[c, q])
    assert com.root == aux.tree.root == _naive_root(aux.tree)
    assert com.leaf_count == n * 8 // 8


def test_commit_constant_column():
    com, aux = commit_columns([np.full(32, 42, dtype=np.uint64)], 5, ProverParams(blowup_log=2))
    assert (aux.lde == 42).all()
    leaves = {aux.tree.leaf_bytes(i) for i in range(aux.tree.leaf_count)}
    assert leaves == {np.full(8, 42, dtype="<u8").tobytes()}


def test_commit_distinct_columns():
    rng = np.random.default_rng(4)
    roots = set()
    for _ in range(1000):
        com, _ = commit_columns([rng.integers(0, P, 4, dtype=np.uint64)], 2, ProverParams(blowup_log=1))
        roots.add(com.root)
    assert len(roots) == 1000


def test_commit_length_mismatch():
    with pytest.raises(FieldError):
        commit_columns([np.zeros(8, dtype=np.uint64)], 4)
    with pytest.raises(FieldError):
        commit_columns([[P] * 4], 2)
