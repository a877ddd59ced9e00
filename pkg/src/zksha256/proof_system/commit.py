"""Low-degree extensions of trace columns and their Merkle commitments."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import _kernels as K
from .._storage import Scratch
from ..field import COSET_SHIFT, FieldError, _FWD, bitrev_powers, interpolate_bitrev
from . import _pkernels as PK
from .merkle import MerkleCommitment, MerkleTree
from .params import ProverParams


def pmap(fn, items, workers: int = 1):
    """Ordered map; results never depend on the worker count."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def lde_from_bitrev(coeffs_br: np.ndarray, blowup_log: int, out: np.ndarray, shift: int = COSET_SHIFT,
                    spow: np.ndarray | None = None) -> np.ndarray:
    """Evaluate a degree < n polynomial on shift * <w_N>, N = n * 2^blowup_log, natural order."""
    n = coeffs_br.shape[0]
    log_n = n.bit_length() - 1
    if spow is None:
        spow = bitrev_powers(shift, log_n)
    # coefficient k sits at bitrev_L(k) in size n and at bitrev_L(k) << b in size N;
    # the first b butterfly levels would only copy it across its block of 2^b
    stride = 1 << blowup_log
    PK.broadcast_scaled(coeffs_br, spow, out, stride)
    log_big = log_n + blowup_log
    if log_big:
        K.dit_from(out, _FWD.get(log_big), stride)
    return out


@dataclass
class CommittedColumns:
    """Prover-side data behind a commitment."""

    coeffs: np.ndarray  # (C, n) bit-reversed coefficients
    lde: np.ndarray  # (C, N) evaluations on the coset, natural order
    tree: MerkleTree

    @property
    def commitment(self) -> MerkleCommitment:
        return self.tree.commitment


def commit_coefficients(coeffs: np.ndarray, blowup_log: int, scratch: Scratch | None = None,
                        workers: int = 1) -> CommittedColumns:
    scratch = scratch or Scratch()
    c, n = coeffs.shape
    lde = scratch.empty((c, n << blowup_log))
    spow = bitrev_powers(COSET_SHIFT, n.bit_length() - 1)
    pmap(lambda i: lde_from_bitrev(coeffs[i], blowup_log, lde[i], spow=spow), range(c), workers)
    return CommittedColumns(coeffs, lde, MerkleTree(lde, scratch=scratch))


def interpolate_columns(values: np.ndarray, scratch: Scratch | None = None, workers: int = 1) -> np.ndarray:
    scratch = scratch or Scratch()
    coeffs = scratch.empty(values.shape)
    pmap(lambda i: interpolate_bitrev(values[i], coeffs[i]), range(values.shape[0]), workers)
    return coeffs


def commit_columns(columns, domain_log: int, params: ProverParams | None = None,
                   scratch: Scratch | None = None, workers: int = 1):
    """Interpolate columns over the size-2^domain_log subgroup, extend to the coset and commit.

    Returns (MerkleCommitment, CommittedColumns).
    """
    params = params or ProverParams()
    cols = np.stack([np.asarray(cl, dtype=np.uint64) if isinstance(cl, np.ndarray)
                     else np.array([int(v) for v in cl], dtype=np.uint64) for cl in columns])
    if cols.shape[1] != 1 << domain_log:
        raise FieldError(f"column length {cols.shape[1]} does not match domain size {1 << domain_log}")
    if np.any(cols >= np.uint64(K.P_INT)):
        raise FieldError("non-canonical column value")
    aux = commit_coefficients(interpolate_columns(cols, scratch, workers), params.blowup_log, scratch, workers)
    return aux.commitment, aux
