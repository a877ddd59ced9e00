import numpy as np
import pytest

from zksha256.field import P
from zksha256.proof_system import ProverParams, Transcript, fri_prove, fri_verify
from zksha256.proof_system.commit import lde_from_bitrev
from zksha256.proof_system.fri import final_length, num_folds


def _codeword(rng, degree_bound, blowup_log, random=False):
    size = degree_bound << blowup_log
    cw = np.empty((2, size), dtype=np.uint64)
    for e in range(2):
        if random:
            cw[e] = rng.integers(0, P, size, dtype=np.uint64)
        else:
            lde_from_bitrev(rng.integers(0, P, degree_bound, dtype=np.uint64), blowup_log, cw[e])
    return cw


def _prove_verify(cw, degree_bound, params, tamper=None):
    proof, _ = fri_prove(cw, degree_bound, params, Transcript(params.transcript_domain_tag))
    if tamper:
        tamper(proof)
    log_size = cw.shape[1].bit_length() - 1
    return fri_verify(proof, log_size, degree_bound, params, Transcript(params.transcript_domain_tag))


def test_fold_counts():
    assert num_folds(1 << 16, 8) == 13
    assert num_folds(8, 8) == 0
    assert final_length(1 << 16, 13) == 8


@pytest.mark.parametrize("degree_bound", [1, 2, 8, 16, 1024])
@pytest.mark.parametrize("stop", [1, 8])
def test_completeness(degree_bound, stop):
    params = ProverParams(fri_stop_degree=stop)
    cw = _codeword(np.random.default_rng(degree_bound), degree_bound, 3)
    assert _prove_verify(cw, degree_bound, params)


def test_random_vectors_rejected_100():
    rng = np.random.default_rng(100)
    params = ProverParams()
    rejected = sum(not _prove_verify(_codeword(rng, 64, 3, random=True), 64, params) for _ in range(100))
    assert rejected == 100


def test_degree_too_high_rejected():
    rng = np.random.default_rng(5)
    params = ProverParams()
    cw = _codeword(rng, 256, 2)  # degree < 256 claimed as < 64 on a size-1024 domain
    assert not _prove_verify(cw, 64, params)


def test_tampered_layer_value_rejected():
    rng = np.random.default_rng(6)
    params = ProverParams()
    cw = _codeword(rng, 512, 3)

    def bump(layer, q):
        def f(proof):
            proof.openings[layer].values[q, 0, 0] = (int(proof.openings[layer].values[q, 0, 0]) + 1) % P
        return f

    assert _prove_verify(cw, 512, params)
    for layer in (0, 1, -1):
        assert not _prove_verify(cw, 512, params, bump(layer, 0))


def test_tampered_final_and_root_rejected():
    rng = np.random.default_rng(7)
    params = ProverParams()
    cw = _codeword(rng, 512, 3)

    def final(proof):
        proof.final_coeffs[0, 0] = (int(proof.final_coeffs[0, 0]) + 1) % P

    def root(proof):
        proof.roots[1] = bytes(32)

    assert not _prove_verify(cw, 512, params, final)
    assert not _prove_verify(cw, 512, params, root)


def test_wrong_transcript_rejected():
    rng = np.random.default_rng(8)
    params = ProverParams()
    cw = _codeword(rng, 128, 3)
    proof, _ = fri_prove(cw, 128, params, Transcript(params.transcript_domain_tag))
    other = Transcript(params.transcript_domain_tag)
    other.absorb(b"extra", b"x")
    assert not fri_verify(proof, 10, 128, params, other)
