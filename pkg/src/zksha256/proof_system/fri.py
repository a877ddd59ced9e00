"""FRI low-degree test over extension-valued codewords on the coset shift * <w_N>.

Layer i lives on s^(2^i) * <w_(N_i)>, N_i = N >> i, stored planar (2, N_i).
A query q0 in [0, N/2) touches positions q_i and q_i + N_i/2 of layer i with
q_i = q0 mod N_i/2; the folded value lands at position q_i of layer i+1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .. import _kernels as K
from .._storage import Scratch
from ..field import COSET_SHIFT, P, ExtFieldElement, _INV, bitrev_powers, inverse, root_of_unity
from . import _pkernels as PK
from .merkle import MerkleTree, verify_batch
from .params import ProverParams
from .transcript import Transcript


class FriError(ValueError):
    pass


def num_folds(degree_bound: int, stop: int) -> int:
    """Smallest F with degree_bound >> F <= stop."""
    f = 0
    while (degree_bound >> f) > stop:
        f += 1
    return f


def final_length(degree_bound: int, folds: int) -> int:
    return max(degree_bound >> folds, 1)


def ext_to_u64(e: ExtFieldElement) -> tuple[np.uint64, np.uint64]:
    return np.uint64(e.c0), np.uint64(e.c1)


@dataclass
class Opening:
    values: np.ndarray  # (Q, width, C) uint64
    paths: np.ndarray  # (Q, depth, 32) uint8

    def leaf_bytes(self) -> np.ndarray:
        q = self.values.shape[0]
        return np.ascontiguousarray(self.values.astype("<u8")).view(np.uint8).reshape(q, -1)


@dataclass
class FriProof:
    roots: list  # committed layer roots (layer 0 first if it was committed)
    final_coeffs: np.ndarray  # (d, 2) natural-order extension coefficients
    openings: list = field(default_factory=list)  # one Opening per committed layer


def leaf_geometry(size: int) -> tuple[int, int, int]:
    """(width, leaf_count, depth) of a tree over ``size`` points."""
    w = min(8, size)
    leaves = size // w
    return w, leaves, leaves.bit_length() - 1


def _coset_interpolate(vals: np.ndarray, shift: int) -> np.ndarray:
    """Natural-order coefficients of the polynomial taking ``vals`` on shift * <w>."""
    n = vals.shape[0]
    log_n = n.bit_length() - 1
    a = vals.copy()
    if log_n:
        K.dif(a, _INV.get(log_n))
        K.vscale(a, np.uint64(inverse(n)), a)
    K.vmul(a, bitrev_powers(inverse(shift), log_n), a)
    K.bitrev_permute(a)
    return a


class _Layers:
    """The chain of folded codewords, layer 0 first."""

    def __init__(self, codeword: np.ndarray, log_size: int, scratch: Scratch):
        self.log_size = log_size
        self.scratch = scratch
        self.values = [codeword]

    def fold(self, beta: ExtFieldElement) -> np.ndarray:
        i = len(self.values) - 1
        cur = self.values[i]
        size = cur.shape[1]
        shift = pow(COSET_SHIFT, 1 << i, P)
        winv = inverse(root_of_unity(self.log_size - i))
        nxt = self.scratch.empty((2, size // 2))
        b0, b1 = ext_to_u64(beta)
        PK.fri_fold(cur[0], cur[1], b0, b1, np.uint64(inverse(shift)), np.uint64(winv), nxt[0], nxt[1])
        self.values.append(nxt)
        return nxt


def fri_commit_phase(codeword: np.ndarray, log_size: int, degree_bound: int, params: ProverParams,
                     transcript: Transcript, commit_first: bool = False, strict: bool = True,
                     scratch: Scratch | None = None):
    """Run folding against the transcript; returns (FriProof without openings, trees, layer arrays, queries).

    ``strict`` asserts the final layer really has degree below its bound (honest prover).
    """
    scratch = scratch or Scratch()
    folds = num_folds(degree_bound, params.fri_stop_degree)
    if folds >= log_size:
        raise FriError("domain too small for the requested degree bound")
    layers = _Layers(codeword, log_size, scratch)
    roots, trees = [], []
    if commit_first:
        t = MerkleTree(codeword, scratch=scratch)
        trees.append(t)
        roots.append(t.root)
        transcript.absorb(b"fri_layer", t.root)
    for i in range(folds):
        if i > 0:
            t = MerkleTree(layers.values[i], scratch=scratch)
            trees.append(t)
            roots.append(t.root)
            transcript.absorb(b"fri_layer", t.root)
        beta = transcript.challenge_ext(b"fri_beta")
        layers.fold(beta)
    last = layers.values[folds]
    shift = pow(COSET_SHIFT, 1 << folds, P)
    c0 = _coset_interpolate(np.ascontiguousarray(last[0]), shift)
    c1 = _coset_interpolate(np.ascontiguousarray(last[1]), shift)
    d = final_length(degree_bound, folds)
    if strict and (np.any(c0[d:]) or np.any(c1[d:])):
        raise FriError("codeword is not of the claimed degree")
    final = np.ascontiguousarray(np.stack([c0[:d], c1[:d]], axis=1))
    transcript.absorb(b"fri_final", final.astype("<u8").tobytes())
    queries = transcript.challenge_indices(b"queries", params.num_queries, 1 << (log_size - 1))
    return FriProof(roots, final), trees, layers.values, np.asarray(queries, dtype=np.int64)


def fri_open(proof: FriProof, trees: list, queries: np.ndarray, log_size: int, first_layer: int) -> FriProof:
    """Attach Merkle openings; trees[k] belongs to layer first_layer + k."""
    for k, tree in enumerate(trees):
        i = first_layer + k
        size = 1 << (log_size - i)
        qi = queries & (size // 2 - 1)
        _, leaves, _ = leaf_geometry(size)
        vals, paths = tree.open_many(qi & (leaves - 1))
        proof.openings.append(Opening(vals, paths))
    return proof


def fri_prove(codeword: np.ndarray, degree_bound: int, params: ProverParams, transcript: Transcript,
              commit_first: bool = True, strict: bool = False, scratch: Scratch | None = None):
    """Standalone FRI on a (2, N) codeword; layer 0 is committed so it can be opened."""
    log_size = codeword.shape[1].bit_length() - 1
    proof, trees, _, queries = fri_commit_phase(codeword, log_size, degree_bound, params, transcript,
                                                commit_first=commit_first, strict=strict, scratch=scratch)
    fri_open(proof, trees, queries, log_size, 0 if commit_first else 1)
    return proof, queries


def _pick(values: np.ndarray, k: np.ndarray) -> np.ndarray:
    return values[np.arange(values.shape[0]), k]


def fri_verify(proof: FriProof, log_size: int, degree_bound: int, params: ProverParams,
               transcript: Transcript, layer0=None) -> bool:
    """Replay the transcript and check every query.

    ``layer0(queries)`` supplies (Q, 2, 2) layer-0 values at q0 and q0 + N/2 for an
    uncommitted first layer; it returns None to reject.  Without it, layer 0 must
    be committed and opened in the proof.
    """
    folds = num_folds(degree_bound, params.fri_stop_degree)
    if folds >= log_size:
        return False
    commit_first = layer0 is None
    n_roots = folds if commit_first else max(folds - 1, 0)
    if commit_first and folds == 0:
        n_roots = 1
    if len(proof.roots) != n_roots or len(proof.openings) != n_roots:
        return False
    d = final_length(degree_bound, folds)
    final = proof.final_coeffs
    if final.shape != (d, 2) or np.any(final >= np.uint64(P)):
        return False
    roots = list(proof.roots)
    if commit_first:
        transcript.absorb(b"fri_layer", roots[0])
    betas = np.empty((max(folds, 1), 2), dtype=np.uint64)
    r = 1 if commit_first else 0
    for i in range(folds):
        if i > 0:
            transcript.absorb(b"fri_layer", roots[r])
            r += 1
        b = transcript.challenge_ext(b"fri_beta")
        betas[i] = (b.c0, b.c1)
    transcript.absorb(b"fri_final", final.astype("<u8").tobytes())
    q0 = np.asarray(transcript.challenge_indices(b"queries", params.num_queries, 1 << (log_size - 1)),
                    dtype=np.int64)
    nq = q0.shape[0]

    first = 0 if commit_first else 1
    pairs = np.empty((max(folds, 1), nq, 2, 2), dtype=np.uint64)
    nextvals = np.zeros((max(folds, 1), nq, 2), dtype=np.uint64)
    for k, op in enumerate(proof.openings):
        i = first + k
        size = 1 << (log_size - i)
        w, leaves, depth = leaf_geometry(size)
        if op.values.shape != (nq, w, 2) or op.paths.shape != (nq, depth, 32):
            return False
        if np.any(op.values >= np.uint64(P)):
            return False
        qi = q0 & (size // 2 - 1)
        if not verify_batch(roots[k], qi & (leaves - 1), op.leaf_bytes(), op.paths):
            return False
        stride = size // w
        k0 = qi // stride
        if i < max(folds, 1):
            pairs[i, :, 0] = _pick(op.values, k0)
            pairs[i, :, 1] = _pick(op.values, k0 + w // 2)
        if i > 0:
            prev = q0 & (size - 1)  # q_{i-1}, a position in this layer
            nextvals[i - 1] = _pick(op.values, prev // stride)
    if not commit_first:
        v = layer0(q0)
        if v is None:
            return False
        pairs[0] = v
    if folds == 0:
        # nothing to fold: layer 0 must already match the final polynomial
        size = 1 << log_size
        root = root_of_unity(log_size)
        xs = np.empty(nq, dtype=np.uint64)
        PK.points(np.uint64(COSET_SHIFT), np.uint64(root), q0, xs)
        got = np.empty((nq, 2), dtype=np.uint64)
        PK.eval_final(np.ascontiguousarray(final[:, 0]), np.ascontiguousarray(final[:, 1]), xs, got)
        if not np.array_equal(got, pairs[0, :, 0]):
            return False
        PK.points(np.uint64(COSET_SHIFT), np.uint64(root), q0 + size // 2, xs)
        PK.eval_final(np.ascontiguousarray(final[:, 0]), np.ascontiguousarray(final[:, 1]), xs, got)
        return bool(np.array_equal(got, pairs[0, :, 1]))
    shifts_inv, roots_inv, shift_f, root_f = _fold_constants(log_size, folds)
    return bool(PK.fri_check(pairs, nextvals, q0, log_size, shifts_inv, roots_inv, betas,
                             np.ascontiguousarray(final[:, 0]), np.ascontiguousarray(final[:, 1]),
                             shift_f, root_f))


@lru_cache(maxsize=64)
def _fold_constants(log_size: int, folds: int):
    shifts_inv = np.array([inverse(pow(COSET_SHIFT, 1 << i, P)) for i in range(folds)], dtype=np.uint64)
    roots_inv = np.array([inverse(root_of_unity(log_size - i)) for i in range(folds)], dtype=np.uint64)
    for a in (shifts_inv, roots_inv):
        a.setflags(write=False)
    return (shifts_inv, roots_inv, np.uint64(pow(COSET_SHIFT, 1 << folds, P)),
            np.uint64(root_of_unity(log_size - folds)))
