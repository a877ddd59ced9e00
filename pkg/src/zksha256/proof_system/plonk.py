"""PLONK-style prover and verifier with FRI-committed openings.

Committed columns, in evaluation order:
    0-7   q_l q_r q_m q_o q_c sigma_a sigma_b sigma_c   (setup)
    8-10  a b c                                          (wires)
    11-12 Z0 Z1, Z = Z0 + phi*Z1                         (permutation)
    13-18 t_{c,e}, chunk c component e at 13 + 2c + e    (quotient)
plus Z0, Z1 at zeta*omega (evaluations 19, 20).

Constraint, checked on H and enforced through t = C / Z_H:
    C = gate + PI + alpha * (Z(x) num(x) - Z(wx) den(x)) + alpha^2 * L0(x) (Z(x) - 1)
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .. import _kernels as K
from .._storage import Scratch
from ..circuit import Circuit, Witness, check_witness
from ..field import (COSET_SHIFT, P, ExtFieldElement, _INV, bitrev_powers, domain_powers,
                     interpolate_bitrev, inverse, root_of_unity)
from . import _pkernels as PK
from .commit import CommittedColumns, commit_coefficients, interpolate_columns, lde_from_bitrev, pmap
from .fri import Opening, fri_commit_phase, fri_open, fri_verify, leaf_geometry, num_folds
from .merkle import verify_batch
from .params import ProverParams
from .proof import NUM_EVALS, TRACE_WIDTHS, Proof, ProofFormatError
from .transcript import Transcript

NUM_COLUMNS = 19
PERMUTATION_SHIFTS = (1, 7, 49)


class ProverError(ValueError):
    pass


class VerifierDataError(ValueError):
    pass


@dataclass(frozen=True)
class VerifierData:
    params: ProverParams
    log_n: int
    circuit_digest: bytes
    pre_root: bytes
    public_rows: tuple

    @property
    def n(self) -> int:
        return 1 << self.log_n

    @property
    def num_publics(self) -> int:
        return len(self.public_rows)

    def to_bytes(self) -> bytes:
        return (self.params.to_bytes() + struct.pack("<Q", self.log_n) + self.circuit_digest
                + self.pre_root + struct.pack("<Q", len(self.public_rows))
                + np.asarray(self.public_rows, dtype="<u8").tobytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "VerifierData":
        k = ProverParams.SIZE
        if len(data) < k + 8 + 64 + 8:
            raise VerifierDataError("truncated verifier data")
        params = ProverParams.from_bytes(data[:k])
        log_n = struct.unpack_from("<Q", data, k)[0]
        digest = bytes(data[k + 8:k + 40])
        root = bytes(data[k + 40:k + 72])
        npub = struct.unpack_from("<Q", data, k + 72)[0]
        body = data[k + 80:]
        if log_n > 30 or len(body) != 8 * npub:
            raise VerifierDataError("malformed verifier data")
        rows = tuple(int(x) for x in np.frombuffer(body, dtype="<u8"))
        if any(r >= 1 << log_n for r in rows):
            raise VerifierDataError("public row out of range")
        return cls(params, log_n, digest, root, rows)


@dataclass
class ProverKey:
    params: ProverParams
    circuit_digest: bytes
    pre: CommittedColumns
    sigma_values: np.ndarray  # (3, n) permutation targets as field points
    verifier_data: VerifierData
    scratch: Scratch


def _ext(e: ExtFieldElement) -> tuple:
    return np.uint64(e.c0), np.uint64(e.c1)


def _mul_phi(e: ExtFieldElement) -> ExtFieldElement:
    return ExtFieldElement(7 * e.c1, e.c0)


def setup(circuit: Circuit, params: ProverParams | None = None, workers: int = 1,
          scratch: Scratch | None = None) -> tuple[ProverKey, VerifierData]:
    """Commit the preprocessed columns: selectors and permutation targets."""
    params = params or ProverParams()
    scratch = scratch or Scratch()
    n = circuit.n
    omega_pows = domain_powers(root_of_unity(circuit.log_n), n)
    sig = np.empty((3, n), dtype=np.uint64)
    PK.sigma_values(circuit.sigma, n, omega_pows, sig)
    values = scratch.empty((8, n))
    values[:5] = circuit.selectors.T
    values[5:] = sig
    pre = commit_coefficients(interpolate_columns(values, scratch, workers), params.blowup_log, scratch, workers)
    vd = VerifierData(params, circuit.log_n, circuit.digest(), pre.tree.root,
                      tuple(int(r) for r in circuit.public_rows))
    return ProverKey(params, circuit.digest(), pre, sig, vd, scratch), vd


def _open_transcript(params: ProverParams, vd: VerifierData, publics: np.ndarray) -> Transcript:
    t = Transcript(params.transcript_domain_tag)
    t.absorb(b"circuit", vd.circuit_digest)
    t.absorb(b"params", params.to_bytes())
    t.absorb(b"log_n", struct.pack("<Q", vd.log_n))
    t.absorb(b"pre", vd.pre_root)
    t.absorb(b"publics", np.asarray(publics, dtype="<u8").tobytes())
    return t


def _quotient_domain(cc: CommittedColumns, i: int, blowup_log: int, scratch: Scratch) -> np.ndarray:
    """Column i on the size-4n coset s * <w_4n>."""
    if blowup_log >= 2:
        return cc.lde[i, ::1 << (blowup_log - 2)]
    out = scratch.empty(4 * cc.coeffs.shape[1])
    return lde_from_bitrev(cc.coeffs[i], 2, out)


_BITREV2 = (0, 2, 1, 3)


def prove(circuit: Circuit, witness: Witness, publics, params: ProverParams | None = None,
          key: ProverKey | None = None, workers: int = 1, scratch: Scratch | None = None) -> Proof:
    pubs = [int(v) for v in publics]
    if not check_witness(circuit, witness, pubs):
        raise ProverError("witness does not satisfy the circuit")
    if key is None:
        key, _ = setup(circuit, params, workers, scratch)
    params = params or key.params
    if key.params != params or key.circuit_digest != circuit.digest():
        raise ProverError("prover key does not match circuit or parameters")
    scratch = scratch or key.scratch
    vd = key.verifier_data
    n, log_n, b = circuit.n, circuit.log_n, params.blowup_log
    big_log = log_n + b
    pub_arr = np.array(pubs, dtype=np.uint64)
    tr = _open_transcript(params, vd, pub_arr)

    # round 1: wires
    w = np.ascontiguousarray(witness.values[circuit.wires.T])
    wires = commit_coefficients(interpolate_columns(w, scratch, workers), b, scratch, workers)
    tr.absorb(b"wires", wires.tree.root)
    beta = tr.challenge_ext(b"beta")
    gamma = tr.challenge_ext(b"gamma")

    # round 2: permutation accumulator
    omega = root_of_unity(log_n)
    z = np.empty((2, n), dtype=np.uint64)
    sig = key.sigma_values
    ok = PK.grand_product(w[0], w[1], w[2], sig[0], sig[1], sig[2], domain_powers(omega, n),
                          *_ext(beta), *_ext(gamma), z[0], z[1])
    if not ok:
        raise ProverError("permutation product does not close")
    del w
    zc = commit_coefficients(interpolate_columns(z, scratch, workers), b, scratch, workers)
    del z
    tr.absorb(b"z", zc.tree.root)
    alpha = tr.challenge_ext(b"alpha")

    # round 3: quotient on the 4n coset
    m = 4 * n
    pi_vals = circuit.public_input_column(pubs)
    pi_coeffs = np.empty(n, dtype=np.uint64)
    interpolate_bitrev(pi_vals, pi_coeffs)
    pi_q = lde_from_bitrev(pi_coeffs, 2, scratch.empty(m))
    root_m = root_of_unity(log_n + 2)
    xm1 = scratch.empty(m)
    K.geometric(np.uint64(COSET_SHIFT), np.uint64(root_m), xm1)
    PK.sub_one(xm1)
    inv_xm1 = scratch.empty(m)
    K.batch_inverse(xm1, inv_xm1)
    del xm1
    sn = pow(COSET_SHIFT, n, P)
    w4 = root_of_unity(2)
    zh = np.array([(sn * pow(w4, j, P) - 1) % P for j in range(4)], dtype=np.uint64)
    zh_inv = np.array([inverse(int(v)) for v in zh], dtype=np.uint64)
    cols = [_quotient_domain(key.pre, i, b, scratch) for i in range(8)]
    cols += [_quotient_domain(wires, i, b, scratch) for i in range(3)]
    cols += [pi_q]
    cols += [_quotient_domain(zc, i, b, scratch) for i in range(2)]
    tq = scratch.empty((2, m))
    alsq = alpha * alpha
    PK.quotient(*cols, np.uint64(COSET_SHIFT), np.uint64(root_m), inv_xm1, zh, zh_inv, n,
                *_ext(beta), *_ext(gamma), *_ext(alpha), *_ext(alsq), tq[0], tq[1])
    del cols, inv_xm1, pi_q
    unshift = bitrev_powers(inverse(COSET_SHIFT), log_n + 2)
    inv_m = np.uint64(inverse(m))
    for e in range(2):
        K.dif(tq[e], _INV.get(log_n + 2))
        K.vscale(tq[e], inv_m, tq[e])
        K.vmul(tq[e], unshift, tq[e])
    del unshift
    # chunk c in bit-reversed order is the stride-4 view at offset bitrev2(c)
    if np.any(tq[:, 3::4]):
        raise ProverError("quotient degree exceeds 3n; constraints do not hold")
    tcoef = scratch.empty((6, n))
    for c in range(3):
        for e in range(2):
            tcoef[2 * c + e] = tq[e, _BITREV2[c]::4]
    del tq
    tcc = commit_coefficients(tcoef, b, scratch, workers)
    tr.absorb(b"t", tcc.tree.root)
    zeta = tr.challenge_ext(b"zeta")

    # round 4: evaluations
    coeff_rows = [key.pre.coeffs[i] for i in range(8)] + [wires.coeffs[i] for i in range(3)]
    coeff_rows += [zc.coeffs[i] for i in range(2)] + [tcc.coeffs[i] for i in range(6)]
    zw = zeta * omega
    evals = np.empty((NUM_EVALS, 2), dtype=np.uint64)
    tbl = (np.empty(n, dtype=np.uint64), np.empty(n, dtype=np.uint64))
    K.bitrev_powers_ext(*_ext(zeta), log_n, tbl[0], tbl[1])
    for k, row in enumerate(coeff_rows):
        evals[k] = K.dot_base_ext(row, tbl[0], tbl[1])
    K.bitrev_powers_ext(*_ext(zw), log_n, tbl[0], tbl[1])
    evals[19] = K.dot_base_ext(zc.coeffs[0], tbl[0], tbl[1])
    evals[20] = K.dot_base_ext(zc.coeffs[1], tbl[0], tbl[1])
    del tbl
    tr.absorb(b"evals", evals.astype("<u8").tobytes())
    lam = tr.challenge_ext(b"lambda")

    # round 5: DEEP combination, built in coefficient space
    lam_pows = [ExtFieldElement(1)]
    for _ in range(NUM_EVALS - 1):
        lam_pows.append(lam_pows[-1] * lam)
    acc_a = np.zeros((2, n), dtype=np.uint64)
    for k, row in enumerate(coeff_rows):
        PK.axpy_ext(acc_a[0], acc_a[1], row, *_ext(lam_pows[k]))
    acc_b = np.zeros((2, n), dtype=np.uint64)
    PK.axpy_ext(acc_b[0], acc_b[1], zc.coeffs[0], *_ext(lam_pows[19]))
    PK.axpy_ext(acc_b[0], acc_b[1], zc.coeffs[1], *_ext(lam_pows[20]))
    for arr in (acc_a, acc_b):
        K.bitrev_permute(arr[0])
        K.bitrev_permute(arr[1])
    deep = np.zeros((2, n), dtype=np.uint64)
    PK.divide_linear_into(acc_a[0], acc_a[1], *_ext(zeta), deep[0], deep[1])
    PK.divide_linear_into(acc_b[0], acc_b[1], *_ext(zw), deep[0], deep[1])
    del acc_a, acc_b
    codeword = scratch.empty((2, n << b))
    spow = bitrev_powers(COSET_SHIFT, log_n)
    for e in range(2):
        K.bitrev_permute(deep[e])
    pmap(lambda e: lde_from_bitrev(deep[e], b, codeword[e], spow=spow), range(2), workers)
    del deep

    # round 6: FRI and openings
    fri, fri_trees, _, queries = fri_commit_phase(codeword, big_log, n, params, tr,
                                                  commit_first=False, strict=True, scratch=scratch)
    fri_open(fri, fri_trees, queries, big_log, 1)
    _, leaves, _ = leaf_geometry(n << b)
    trace_openings = []
    for cc in (key.pre, wires, zc, tcc):
        vals, paths = cc.tree.open_many(queries & (leaves - 1))
        trace_openings.append(Opening(vals, paths))
    return Proof(params, log_n, pub_arr, wires.tree.root, zc.tree.root, tcc.tree.root,
                 evals, fri, trace_openings)


# ---------------------------------------------------------------- verifier

def _as_ext(row) -> ExtFieldElement:
    return ExtFieldElement(int(row[0]), int(row[1]))


def _quotient_holds(vd: VerifierData, publics, ev, beta, gamma, alpha, zeta) -> bool:
    n = vd.n
    omega = root_of_unity(vd.log_n)
    zh = zeta ** n - 1
    if zh.is_zero():
        return False
    ql, qr, qm, qo, qc, sa, sb, sc, a, b, c = ev[:11]
    z = ev[11] + _mul_phi(ev[12])
    zw = ev[19] + _mul_phi(ev[20])
    n_inv = inverse(n)
    pi = ExtFieldElement(0)
    for row, v in zip(vd.public_rows, publics):
        wr = pow(omega, row, P)
        d = zeta - wr
        if d.is_zero():
            return False
        pi = pi + (d.inverse() * ((-int(v) * wr * n_inv) % P))
    pi = pi * zh
    gate = ql * a + qr * b + qm * a * b + qo * c + qc + pi
    num = (a + beta * zeta + gamma) * (b + beta * zeta * 7 + gamma) * (c + beta * zeta * 49 + gamma)
    den = (a + beta * sa + gamma) * (b + beta * sb + gamma) * (c + beta * sc + gamma)
    dz = zeta - 1
    if dz.is_zero():
        return False
    l0 = zh * (dz * n).inverse()
    cval = gate + alpha * (z * num - zw * den) + alpha * alpha * l0 * (z - 1)
    zn = zeta ** n
    t = ExtFieldElement(0)
    for k in range(2, -1, -1):
        t = t * zn + ev[13 + 2 * k] + _mul_phi(ev[14 + 2 * k])
    return cval == t * zh


def verify(circuit_digest: bytes, verifier_data, publics, proof) -> bool:
    """True iff ``proof`` convinces the verifier; malformed input yields False."""
    try:
        return _verify(circuit_digest, verifier_data, publics, proof)
    except (ProofFormatError, VerifierDataError, ValueError, TypeError, IndexError,
            OverflowError, ZeroDivisionError):
        return False


def _verify(circuit_digest, vd, publics, proof) -> bool:
    if isinstance(vd, (bytes, bytearray, memoryview)):
        vd = VerifierData.from_bytes(bytes(vd))
    if isinstance(proof, (bytes, bytearray, memoryview)):
        proof = Proof.from_bytes(bytes(proof))
    params = vd.params
    if bytes(circuit_digest) != vd.circuit_digest or proof.params != params or proof.log_n != vd.log_n:
        return False
    pubs = [int(v) for v in publics]
    if len(pubs) != vd.num_publics or any(not 0 <= v < P for v in pubs):
        return False
    if len(proof.publics) != len(pubs) or any(int(x) != v for x, v in zip(proof.publics, pubs)):
        return False
    log_n, b = vd.log_n, params.blowup_log
    big_log = log_n + b
    size = 1 << big_log
    w, leaves, depth = leaf_geometry(size)
    q = params.num_queries
    if len(proof.trace_openings) != len(TRACE_WIDTHS):
        return False
    for op, c in zip(proof.trace_openings, TRACE_WIDTHS):
        if op.values.shape != (q, w, c) or op.paths.shape != (q, depth, 32):
            return False
    if proof.evals.shape != (NUM_EVALS, 2):
        return False

    tr = _open_transcript(params, vd, np.array(pubs, dtype=np.uint64))
    tr.absorb(b"wires", proof.wire_root)
    beta = tr.challenge_ext(b"beta")
    gamma = tr.challenge_ext(b"gamma")
    tr.absorb(b"z", proof.z_root)
    alpha = tr.challenge_ext(b"alpha")
    tr.absorb(b"t", proof.t_root)
    zeta = tr.challenge_ext(b"zeta")
    tr.absorb(b"evals", proof.evals.astype("<u8").tobytes())
    lam = tr.challenge_ext(b"lambda")
    ev = [_as_ext(r) for r in proof.evals]
    if not _quotient_holds(vd, pubs, ev, beta, gamma, alpha, zeta):
        return False

    roots = (vd.pre_root, proof.wire_root, proof.z_root, proof.t_root)
    lam_tab = np.empty((NUM_EVALS, 2), dtype=np.uint64)
    acc = ExtFieldElement(1)
    for k in range(NUM_EVALS):
        lam_tab[k] = (acc.c0, acc.c1)
        acc = acc * lam
    a_z = ExtFieldElement(0)
    for k in range(NUM_COLUMNS):
        a_z = a_z + ev[k] * _as_ext(lam_tab[k])
    b_zw = ev[19] * _as_ext(lam_tab[19]) + ev[20] * _as_ext(lam_tab[20])
    zw = zeta * root_of_unity(log_n)

    def layer0(q0):
        idx = q0 & (leaves - 1)
        for op, root in zip(proof.trace_openings, roots):
            if not verify_batch(root, idx, op.leaf_bytes(), op.paths):
                return None
        k0 = q0 // (size // w)
        sel = np.arange(q0.shape[0])
        vals = np.empty((q0.shape[0], 2, NUM_COLUMNS), dtype=np.uint64)
        vals[:, 0] = np.concatenate([op.values[sel, k0] for op in proof.trace_openings], axis=1)
        vals[:, 1] = np.concatenate([op.values[sel, k0 + w // 2] for op in proof.trace_openings], axis=1)
        xs = np.empty(q0.shape[0], dtype=np.uint64)
        PK.points(np.uint64(COSET_SHIFT), np.uint64(root_of_unity(big_log)), q0, xs)
        out = np.empty((q0.shape[0], 2, 2), dtype=np.uint64)
        if not PK.deep_values(vals, xs, lam_tab, *_ext(a_z), *_ext(b_zw), *_ext(zeta), *_ext(zw), out):
            return None
        return out

    if num_folds(vd.n, params.fri_stop_degree) >= big_log:
        return False
    return fri_verify(proof.fri, big_log, vd.n, params, tr, layer0=layer0)
