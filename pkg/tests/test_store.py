import struct

import pytest

from zksha256 import store
from zksha256.proof_system import Proof, ProverParams, VerifierData, verify
from zksha256.sha256 import Sha256Layout
from zksha256.store import ArtifactKind


def test_header_layout():
    data = store.encode_artifact(ArtifactKind.PROOF, b"payload", ProverParams(num_queries=20))
    assert data[:8] == b"ZKSHA256"
    assert struct.unpack_from("<HH", data, 8) == (store.VERSION, 1)
    assert ProverParams.from_bytes(data[12:52]).num_queries == 20
    assert struct.unpack_from("<Q", data, 52)[0] == 7
    assert len(data) == store.HEADER_SIZE + 7


def test_roundtrip_all_kinds(one_block, tmp_path):
    payloads = {ArtifactKind.PROOF: one_block.proof.to_bytes(),
                ArtifactKind.CIRCUIT: one_block.layout.to_bytes(),
                ArtifactKind.VERIFIER_DATA: one_block.vd.to_bytes()}
    for kind, payload in payloads.items():
        path = tmp_path / f"{kind.name}.bin"
        store.save_artifact(kind, payload, path, one_block.vd.params)
        head, back = store.load_artifact(path, kind, with_header=True)
        assert back == payload and head.kind == kind and head.params == one_block.vd.params
    proof = Proof.from_bytes(store.load_artifact(tmp_path / "PROOF.bin", ArtifactKind.PROOF))
    vd = VerifierData.from_bytes(store.load_artifact(tmp_path / "VERIFIER_DATA.bin", ArtifactKind.VERIFIER_DATA))
    layout = Sha256Layout.from_bytes(store.load_artifact(tmp_path / "CIRCUIT.bin", ArtifactKind.CIRCUIT))
    assert verify(layout.circuit.digest(), vd, one_block.publics, proof)


@pytest.fixture
def saved(tmp_path):
    path = tmp_path / "a.proof"
    store.save_artifact(ArtifactKind.PROOF, bytes(range(200)), path)
    return path


def _patch(path, offset, value: bytes):
    data = bytearray(path.read_bytes())
    data[offset:offset + len(value)] = value
    path.write_bytes(bytes(data))


def test_payload_flip_is_digest_error(saved):
    _patch(saved, store.HEADER_SIZE + 17, b"\xff")
    with pytest.raises(store.DigestMismatchError):
        store.load_artifact(saved)


def test_kind_mismatch(saved):
    with pytest.raises(store.KindMismatchError):
        store.load_artifact(saved, ArtifactKind.CIRCUIT)


def test_bad_magic(saved):
    _patch(saved, 0, b"X")
    with pytest.raises(store.BadMagicError):
        store.load_artifact(saved)


def test_version_mismatch(saved):
    _patch(saved, 8, struct.pack("<H", store.VERSION + 1))
    with pytest.raises(store.VersionMismatchError):
        store.load_artifact(saved)


def test_truncated(saved):
    data = saved.read_bytes()
    saved.write_bytes(data[:-1])
    with pytest.raises(store.TruncatedArtifactError):
        store.load_artifact(saved)
    saved.write_bytes(data[:20])
    with pytest.raises(store.TruncatedArtifactError):
        store.load_artifact(saved)


def test_malformed_params(saved):
    _patch(saved, 12, struct.pack("<Q", 0))
    with pytest.raises(store.MalformedHeaderError):
        store.load_artifact(saved)


def test_io_errors(tmp_path):
    with pytest.raises(store.ArtifactIOError):
        store.load_artifact(tmp_path / "missing")
    with pytest.raises(store.ArtifactIOError):
        store.save_artifact(ArtifactKind.PROOF, b"x", tmp_path / "no" / "dir" / "f")


def test_errors_are_distinct():
    kinds = [store.ArtifactIOError, store.BadMagicError, store.VersionMismatchError, store.DigestMismatchError,
             store.KindMismatchError, store.TruncatedArtifactError, store.MalformedHeaderError]
    assert len(set(kinds)) == len(kinds)
    assert all(issubclass(k, store.StoreError) for k in kinds)
    for a in kinds:
        assert sum(issubclass(a, b) for b in kinds) == 1
