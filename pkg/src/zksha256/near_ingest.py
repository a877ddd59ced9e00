"""NEAR block ingestion: JSON-RPC fetch, canonical serialization, pinned fixtures.

Canonical bytes of a block:

    for each header field, in RPC order:
        u64 len(name) || name || u64 len(value) || value
    u64 number of chunks
    for each chunk:
        u64 tx_count || (u64 32 || 32-byte tx hash) * tx_count

String values are UTF-8; everything else is compact JSON with sorted keys.
All integers are little-endian.
"""
from __future__ import annotations

import hashlib
import json
import os
import struct
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import base58
import requests

RPC_ENV = "ZKSHA256_NEAR_RPC"
DEFAULT_RPC_URL = "https://archival-rpc.mainnet.near.org"
DEFAULT_TIMEOUT = 30.0

FIXTURE_NAMES = ("block-121114606", "block-121136789", "block-121117653", "block-121089333")


class NearIngestError(Exception):
    """Base class for ingestion failures."""


class RpcTimeoutError(NearIngestError):
    pass


class RpcTransportError(NearIngestError):
    pass


class RpcError(NearIngestError):
    def __init__(self, message: str, payload=None):
        super().__init__(message)
        self.payload = payload


class UnknownBlockError(RpcError):
    pass


class MissingFieldError(NearIngestError):
    pass


class FixtureIntegrityError(NearIngestError):
    pass


@dataclass(frozen=True)
class NearBlockRecord:
    height: int
    block_hash: str
    tx_count: int
    raw_bytes: bytes
    source: str  # "rpc" or "fixture"
    fetched_at: float | None = None

    def __post_init__(self):
        if not self.raw_bytes:
            raise ValueError("raw_bytes must be non-empty")
        if self.tx_count < 0:
            raise ValueError("tx_count must be non-negative")
        if len(decode_hash(self.block_hash)) != 32:
            raise ValueError("block hash must decode to 32 bytes")


def decode_hash(text: str) -> bytes:
    try:
        return base58.b58decode(text)
    except ValueError as e:
        raise ValueError(f"invalid base58 hash {text!r}") from e


def default_endpoint() -> str:
    return os.environ.get(RPC_ENV) or DEFAULT_RPC_URL


# ---------------------------------------------------------------- serialization

def _lp(data: bytes) -> bytes:
    return struct.pack("<Q", len(data)) + data


def _value_bytes(v) -> bytes:
    if isinstance(v, str):
        return v.encode("utf-8")
    return json.dumps(v, separators=(",", ":"), sort_keys=True).encode("utf-8")


def _require(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise MissingFieldError(f"missing field {where}.{key}")
    return obj[key]


def canonical_bytes(block: dict, chunks: list | None = None) -> bytes:
    """Deterministic bytes for a block response plus its chunk responses.

    ``block`` may also be the combined form {"block": ..., "chunks": [...]}.
    """
    if chunks is None and isinstance(block, dict) and "block" in block:
        chunks = _require(block, "chunks", "response")
        block = block["block"]
    header = _require(block, "header", "block")
    _require(header, "height", "header")
    _require(header, "hash", "header")
    if not isinstance(header, dict):
        raise MissingFieldError("block header must be an object")
    if chunks is None:
        raise MissingFieldError("chunk responses are required")
    out = bytearray()
    for key, value in header.items():
        out += _lp(key.encode("utf-8")) + _lp(_value_bytes(value))
    out += struct.pack("<Q", len(chunks))
    for i, chunk in enumerate(chunks):
        txs = _require(chunk, "transactions", f"chunks[{i}]")
        out += struct.pack("<Q", len(txs))
        for tx in txs:
            h = decode_hash(_require(tx, "hash", "transaction"))
            if len(h) != 32:
                raise ValueError("transaction hash must decode to 32 bytes")
            out += _lp(h)
    return bytes(out)


def tx_count(chunks: list) -> int:
    return sum(len(_require(c, "transactions", "chunk")) for c in chunks)


# ---------------------------------------------------------------- RPC

class _Client:
    def __init__(self, endpoint: str, timeout: float, session=None):
        self.endpoint = endpoint
        self.timeout = timeout
        self.session = session or requests.Session()
        self.counter = 0

    def call(self, method: str, params: dict):
        self.counter += 1
        payload = {"jsonrpc": "2.0", "id": f"zksha256-{self.counter}", "method": method, "params": params}
        last = None
        for attempt in range(2):  # one retry on transient failure
            try:
                resp = self.session.post(self.endpoint, json=payload, timeout=self.timeout)
            except requests.Timeout as e:
                last = RpcTimeoutError(f"{method}: timed out after {self.timeout}s")
                last.__cause__ = e
                continue
            except requests.RequestException as e:
                last = RpcTransportError(f"{method}: {e.__class__.__name__}: {e}")
                continue
            if resp.status_code >= 500:
                last = RpcTransportError(f"{method}: HTTP {resp.status_code}")
                continue
            try:
                body = resp.json()
            except ValueError:
                raise RpcTransportError(f"{method}: response is not JSON (HTTP {resp.status_code})") from None
            if not isinstance(body, dict):
                raise RpcTransportError(f"{method}: unexpected response shape")
            if body.get("error") is not None:
                err = body["error"]
                cause = (err.get("cause") or {}).get("name") if isinstance(err, dict) else None
                text = json.dumps(err, sort_keys=True) if not isinstance(err, str) else err
                if cause in ("UNKNOWN_BLOCK", "UNKNOWN_CHUNK") or "UNKNOWN_BLOCK" in text:
                    raise UnknownBlockError(f"{method}: unknown block ({text})", err)
                raise RpcError(f"{method}: RPC error {text}", err)
            if "result" not in body:
                raise RpcTransportError(f"{method}: response without result")
            return body["result"]
        raise last


def fetch_block(rpc_endpoint: str | None, block_id, timeout: float = DEFAULT_TIMEOUT,
                session=None) -> NearBlockRecord:
    """Fetch a block by height (int) or base58 hash (str) and serialize it canonically."""
    client = _Client(rpc_endpoint or default_endpoint(), timeout, session)
    if isinstance(block_id, str) and block_id.isdigit():
        block_id = int(block_id)
    block = client.call("block", {"block_id": block_id})
    chunks = []
    for ch in _require(block, "chunks", "block"):
        chunks.append(client.call("chunk", {"chunk_id": _require(ch, "chunk_hash", "chunk")}))
    header = _require(block, "header", "block")
    raw = canonical_bytes(block, chunks)
    return NearBlockRecord(int(header["height"]), header["hash"], tx_count(chunks), raw, "rpc",
                           fetched_at=time.time())


# ---------------------------------------------------------------- fixtures

@dataclass(frozen=True)
class FixtureManifest:
    name: str
    height: int
    block_hash: str
    tx_count: int
    byte_length: int
    sha256: str
    extra: tuple = ()

    def to_text(self) -> str:
        lines = [f"name={self.name}", f"height={self.height}", f"hash={self.block_hash}",
                 f"tx_count={self.tx_count}", f"byte_length={self.byte_length}", f"sha256={self.sha256}"]
        lines += [f"{k}={v}" for k, v in self.extra]
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "FixtureManifest":
        kv = {}
        order = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            k, sep, v = line.partition("=")
            if not sep:
                raise FixtureIntegrityError(f"bad manifest line {line!r}")
            kv[k.strip()] = v.strip()
            order.append(k.strip())
        try:
            core = ("name", "height", "hash", "tx_count", "byte_length", "sha256")
            extra = tuple((k, kv[k]) for k in order if k not in core)
            return cls(kv["name"], int(kv["height"]), kv["hash"], int(kv["tx_count"]),
                       int(kv["byte_length"]), kv["sha256"].lower(), extra)
        except (KeyError, ValueError) as e:
            raise FixtureIntegrityError(f"incomplete manifest: {e}") from None

    def get(self, key: str, default=None):
        return dict(self.extra).get(key, default)


def _fixture_dir(directory):
    if directory is not None:
        return Path(directory)
    return Path(str(resources.files("zksha256") / "data"))


def manifest_for(record: NearBlockRecord, name: str | None = None, **extra) -> FixtureManifest:
    return FixtureManifest(name or f"block-{record.height}", record.height, record.block_hash,
                           record.tx_count, len(record.raw_bytes),
                           hashlib.sha256(record.raw_bytes).hexdigest(),
                           tuple((k, str(v)) for k, v in extra.items()))


def save_fixture(record: NearBlockRecord, path, response: dict | None = None, **extra) -> FixtureManifest:
    """Write <path> (raw bytes) and <path>.manifest; optionally <path>.json with the RPC responses."""
    path = Path(path)
    if path.suffix != ".bin":
        path = path.with_name(path.name + ".bin")
    path.parent.mkdir(parents=True, exist_ok=True)
    man = manifest_for(record, path.stem, **extra)
    path.write_bytes(record.raw_bytes)
    path.with_suffix(".manifest").write_text(man.to_text())
    if response is not None:
        path.with_suffix(".json").write_text(json.dumps(response, indent=1, sort_keys=False) + "\n")
    return man


def load_manifest(name: str, directory=None) -> FixtureManifest:
    p = _fixture_dir(directory) / f"{name}.manifest"
    try:
        return FixtureManifest.parse(p.read_text())
    except OSError as e:
        raise FixtureIntegrityError(f"cannot read manifest {p}: {e}") from None


def load_fixture(name: str, directory=None) -> NearBlockRecord:
    """Load a pinned block; the manifest's length and digest must match."""
    base = _fixture_dir(directory)
    man = load_manifest(name, directory)
    try:
        raw = (base / f"{name}.bin").read_bytes()
    except OSError as e:
        raise FixtureIntegrityError(f"cannot read fixture {name}: {e}") from None
    if len(raw) != man.byte_length:
        raise FixtureIntegrityError(f"{name}: length {len(raw)} != manifest {man.byte_length}")
    if hashlib.sha256(raw).hexdigest() != man.sha256:
        raise FixtureIntegrityError(f"{name}: digest mismatch")
    return NearBlockRecord(man.height, man.block_hash, man.tx_count, raw, "fixture")


def load_fixture_response(name: str, directory=None) -> dict:
    return json.loads((_fixture_dir(directory) / f"{name}.json").read_text())


def list_fixtures(directory=None) -> list[str]:
    return sorted(p.stem for p in _fixture_dir(directory).glob("block-*.manifest"))
