"""On-disk artifacts: proofs, circuits and verifier data behind a checked header.

Header layout (little-endian):

    magic            8 bytes  b"ZKSHA256"
    version          u16
    kind             u16      1 proof, 2 circuit, 3 verifier data
    params          40 bytes  ProverParams.to_bytes()
    payload_length   u64
    payload_digest  32 bytes  SHA-256 of the payload
"""
from __future__ import annotations

import enum
import hashlib
import os
import struct
from dataclasses import dataclass
from pathlib import Path

from .proof_system.params import ParamsError, ProverParams

MAGIC = b"ZKSHA256"
VERSION = 1
_HEAD = struct.Struct("<8sHH")
HEADER_SIZE = _HEAD.size + ProverParams.SIZE + 8 + 32


class ArtifactKind(enum.IntEnum):
    PROOF = 1
    CIRCUIT = 2
    VERIFIER_DATA = 3


class StoreError(Exception):
    """Base class; every subclass is a distinct failure mode."""


class ArtifactIOError(StoreError):
    pass


class BadMagicError(StoreError):
    pass


class VersionMismatchError(StoreError):
    pass


class TruncatedArtifactError(StoreError):
    pass


class MalformedHeaderError(StoreError):
    pass


class DigestMismatchError(StoreError):
    pass


class KindMismatchError(StoreError):
    pass


@dataclass(frozen=True)
class ArtifactHeader:
    kind: ArtifactKind
    params: ProverParams
    payload_length: int
    payload_digest: bytes
    version: int = VERSION

    def to_bytes(self) -> bytes:
        return (_HEAD.pack(MAGIC, self.version, int(self.kind)) + self.params.to_bytes()
                + struct.pack("<Q", self.payload_length) + self.payload_digest)

    @classmethod
    def parse(cls, data: bytes) -> "ArtifactHeader":
        if len(data) < _HEAD.size:
            raise TruncatedArtifactError(f"header needs {HEADER_SIZE} bytes, got {len(data)}")
        magic, version, kind = _HEAD.unpack_from(data)
        if magic != MAGIC:
            raise BadMagicError(f"bad magic {magic!r}")
        if version != VERSION:
            raise VersionMismatchError(f"artifact version {version}, this build reads {VERSION}")
        if len(data) < HEADER_SIZE:
            raise TruncatedArtifactError(f"header needs {HEADER_SIZE} bytes, got {len(data)}")
        try:
            kind = ArtifactKind(kind)
        except ValueError:
            raise KindMismatchError(f"unknown artifact kind {kind}") from None
        off = _HEAD.size
        try:
            params = ProverParams.from_bytes(data[off:off + ProverParams.SIZE])
        except ParamsError as e:
            raise MalformedHeaderError(f"invalid parameter echo: {e}") from None
        off += ProverParams.SIZE
        (length,) = struct.unpack_from("<Q", data, off)
        return cls(kind, params, length, bytes(data[off + 8:off + 40]), version)


def encode_artifact(kind, payload: bytes, params: ProverParams | None = None) -> bytes:
    payload = bytes(payload)
    head = ArtifactHeader(ArtifactKind(kind), params or ProverParams(), len(payload),
                          hashlib.sha256(payload).digest())
    return head.to_bytes() + payload


def decode_artifact(data: bytes, expected_kind=None) -> tuple[ArtifactHeader, bytes]:
    head = ArtifactHeader.parse(data)
    if expected_kind is not None and head.kind != ArtifactKind(expected_kind):
        raise KindMismatchError(f"expected {ArtifactKind(expected_kind).name.lower()}, "
                                f"found {head.kind.name.lower()}")
    payload = data[HEADER_SIZE:]
    if len(payload) < head.payload_length:
        raise TruncatedArtifactError(f"payload has {len(payload)} of {head.payload_length} bytes")
    if len(payload) > head.payload_length:
        raise TruncatedArtifactError(f"{len(payload) - head.payload_length} trailing bytes after payload")
    if hashlib.sha256(payload).digest() != head.payload_digest:
        raise DigestMismatchError("payload digest mismatch")
    return head, bytes(payload)


def save_artifact(kind, payload: bytes, path, params: ProverParams | None = None) -> ArtifactHeader:
    data = encode_artifact(kind, payload, params)
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_bytes(data)
        os.replace(tmp, path)
    except OSError as e:
        raise ArtifactIOError(f"cannot write {path}: {e.strerror or e}") from None
    return ArtifactHeader.parse(data)


def load_artifact(path, expected_kind=None, with_header: bool = False):
    """Read and check an artifact; returns the payload (and header if asked)."""
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise ArtifactIOError(f"cannot read {path}: {e.strerror or e}") from None
    head, payload = decode_artifact(data, expected_kind)
    return (head, payload) if with_header else payload
