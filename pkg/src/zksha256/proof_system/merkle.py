"""Merkle commitments over planar column arrays.

Leaves group ``width`` positions of a length-N column set: leaf l holds
positions l + k*N/width for k < width, so a point and its negation (offset
N/2) always share a leaf.  Nodes live in a heap array: root at 1, leaves at
[L, 2L).
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .. import _hashing
from .._storage import Scratch

LEAF_WIDTH = 8


class MerkleError(ValueError):
    pass


def leaf_hash(leaf_bytes: bytes) -> bytes:
    return hashlib.sha256(_hashing.LEAF_PREFIX + leaf_bytes).digest()


def node_hash(left: bytes, right: bytes) -> bytes:
    return hashlib.sha256(_hashing.NODE_PREFIX + left + right).digest()


@dataclass(frozen=True)
class MerkleCommitment:
    root: bytes
    leaf_count: int


class MerkleTree:
    def __init__(self, cols: np.ndarray, width: int | None = None, scratch: Scratch | None = None):
        if cols.ndim != 2:
            raise MerkleError("columns must be a (C, N) array")
        self.cols = cols
        n_points = cols.shape[1]
        self.width = min(LEAF_WIDTH, n_points) if width is None else width
        if n_points % self.width or n_points & (n_points - 1):
            raise MerkleError("point count must be a power of two multiple of the leaf width")
        self.leaf_count = n_points // self.width
        self.depth = self.leaf_count.bit_length() - 1
        scratch = scratch or Scratch()
        L = self.leaf_count
        self.nodes = scratch.empty((2 * L, 32), dtype=np.uint8)
        _hashing.hash_leaves(np.ascontiguousarray(cols) if not cols.flags.c_contiguous else cols,
                             self.width, self.nodes, L, 0, L)
        if L > 1:
            _hashing.hash_internal(self.nodes, 1, L)
        else:
            self.nodes[0] = 0

    @property
    def root(self) -> bytes:
        return self.nodes[1].tobytes()

    @property
    def commitment(self) -> MerkleCommitment:
        return MerkleCommitment(self.root, self.leaf_count)

    def leaf_values(self, leaf: int) -> np.ndarray:
        """(width, C) values of one leaf."""
        stride = self.cols.shape[1] // self.width
        return self.cols[:, leaf + stride * np.arange(self.width)].T

    def leaf_bytes(self, leaf: int) -> bytes:
        return self.leaf_values(leaf).astype("<u8").tobytes()

    def open(self, leaf: int) -> list[bytes]:
        if not 0 <= leaf < self.leaf_count:
            raise MerkleError("leaf index out of range")
        path = []
        idx = self.leaf_count + leaf
        while idx > 1:
            path.append(self.nodes[idx ^ 1].tobytes())
            idx >>= 1
        return path

    def open_many(self, leaves) -> tuple[np.ndarray, np.ndarray]:
        """Batched openings: leaf values (Q, width, C) and paths (Q, depth, 32)."""
        leaves = np.asarray(leaves, dtype=np.int64)
        stride = self.cols.shape[1] // self.width
        pos = leaves[:, None] + stride * np.arange(self.width)[None, :]
        values = np.ascontiguousarray(np.transpose(self.cols[:, pos], (1, 2, 0)))
        paths = np.empty((len(leaves), self.depth, 32), dtype=np.uint8)
        idx = leaves + self.leaf_count
        for d in range(self.depth):
            paths[:, d] = self.nodes[idx ^ 1]
            idx >>= 1
        return values, paths


def merkle_open(tree: MerkleTree, index: int) -> list[bytes]:
    return tree.open(index)


def merkle_verify(root: bytes, index: int, leaf: bytes, path: list[bytes]) -> bool:
    if index < 0 or index >= (1 << len(path)):
        return False
    h = leaf_hash(leaf)
    for sib in path:
        if len(sib) != 32:
            return False
        h = node_hash(sib, h) if index & 1 else node_hash(h, sib)
        index >>= 1
    return h == root


def verify_batch(root: bytes, leaves: np.ndarray, leaf_bytes: np.ndarray, paths: np.ndarray) -> bool:
    """leaf_bytes (Q, B) uint8, paths (Q, depth, 32) uint8."""
    return _hashing.check_paths(leaf_bytes, np.asarray(leaves, dtype=np.int64), paths, root)
