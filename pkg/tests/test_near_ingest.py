import hashlib
import shutil
import socket

import pytest

from rpc_mock import MockNear
from zksha256 import near_ingest as ni
from zksha256.sha256 import block_count

TX = {"block-121114606": 52, "block-121136789": 78, "block-121117653": 102, "block-121089333": 169}
REFERENCE_BYTES = {"block-121114606": 5677, "block-121136789": 5092, "block-121117653": 4897,
                   "block-121089333": 6262}


@pytest.fixture(scope="module")
def mock():
    with MockNear() as m:
        yield m


def test_fixtures_load():
    assert ni.list_fixtures() == sorted(ni.FIXTURE_NAMES)
    for name in ni.FIXTURE_NAMES:
        rec = ni.load_fixture(name)
        man = ni.load_manifest(name)
        assert rec.source == "fixture" and rec.fetched_at is None
        assert rec.height == int(name.split("-")[1])
        assert rec.tx_count == TX[name]
        assert len(rec.raw_bytes) == man.byte_length
        assert hashlib.sha256(rec.raw_bytes).hexdigest() == man.sha256
        assert int(man.get("reference_bytes")) == REFERENCE_BYTES[name]


def test_tx_ordering():
    counts = [ni.load_fixture(n).tx_count for n in ni.FIXTURE_NAMES]
    assert sorted(counts) == [52, 78, 102, 169]


def test_fixture_bytes_are_canonical():
    for name in ni.FIXTURE_NAMES:
        assert ni.canonical_bytes(ni.load_fixture_response(name)) == ni.load_fixture(name).raw_bytes


def test_fixtures_pairwise_distinct():
    raws = [ni.load_fixture(n).raw_bytes for n in ni.FIXTURE_NAMES]
    assert len(set(raws)) == 4


def test_trace_sizes_for_fixtures():
    blocks = {n: block_count(len(ni.load_fixture(n).raw_bytes)) for n in ni.FIXTURE_NAMES}
    # the three smaller blocks share a padded trace size; the largest steps up
    assert max(blocks[n] for n in ni.FIXTURE_NAMES[:3]) <= 88 < blocks["block-121089333"]


def test_corrupted_fixture(tmp_path):
    name = "block-121114606"
    src = ni._fixture_dir(None)
    for ext in (".bin", ".manifest"):
        shutil.copy(src / f"{name}{ext}", tmp_path / f"{name}{ext}")
    assert ni.load_fixture(name, tmp_path).tx_count == 52
    raw = bytearray((tmp_path / f"{name}.bin").read_bytes())
    raw[100] ^= 0xFF
    (tmp_path / f"{name}.bin").write_bytes(bytes(raw))
    with pytest.raises(ni.FixtureIntegrityError):
        ni.load_fixture(name, tmp_path)
    (tmp_path / f"{name}.bin").write_bytes(bytes(raw[:-1]))
    with pytest.raises(ni.FixtureIntegrityError):
        ni.load_fixture(name, tmp_path)
    with pytest.raises(ni.FixtureIntegrityError):
        ni.load_fixture("block-1", tmp_path)


def test_record_invariants():
    with pytest.raises(ValueError):
        ni.NearBlockRecord(1, "DnGLLWt6Q4MKv65uLLc2uAB81eRbvS944f5Jkh2FF5US", 0, b"", "rpc")
    with pytest.raises(ValueError):
        ni.NearBlockRecord(1, "DnGLLWt6Q4MKv65uLLc2uAB81eRbvS944f5Jkh2FF5US", -1, b"x", "rpc")
    with pytest.raises(ValueError):
        ni.NearBlockRecord(1, "4oMRqMRD1P6wPtnkPURNpa6snxUvMFMMyDZCv7uSq53FX", 1, b"x", "rpc")  # 33 bytes
    with pytest.raises(ValueError):
        ni.NearBlockRecord(1, "0OIl", 1, b"x", "rpc")


def test_canonical_bytes_layout():
    block = {"header": {"height": 5, "hash": "11111111111111111111111111111111", "x": [1, 2]}}
    chunks = [{"transactions": [{"hash": "11111111111111111111111111111111"}]}, {"transactions": []}]
    raw = ni.canonical_bytes(block, chunks)

    def lp(b):
        return len(b).to_bytes(8, "little") + b

    expect = (lp(b"height") + lp(b"5") + lp(b"hash") + lp(b"11111111111111111111111111111111")
              + lp(b"x") + lp(b"[1,2]") + (2).to_bytes(8, "little")
              + (1).to_bytes(8, "little") + lp(bytes(32)) + (0).to_bytes(8, "little"))
    assert raw == expect
    with pytest.raises(ni.MissingFieldError):
        ni.canonical_bytes({"header": {"hash": "1"}}, [])
    with pytest.raises(ni.MissingFieldError):
        ni.canonical_bytes(block, [{}])


def test_fetch_by_hash(mock):
    rec = ni.fetch_block(mock.url, "DnGLLWt6Q4MKv65uLLc2uAB81eRbvS944f5Jkh2FF5US")
    assert rec.height == 121114606 and rec.tx_count == 52 and rec.source == "rpc"
    assert rec.raw_bytes == ni.load_fixture("block-121114606").raw_bytes
    assert rec.fetched_at is not None


def test_fetch_by_height_twice_identical(mock):
    a = ni.fetch_block(mock.url, 121089333)
    b = ni.fetch_block(mock.url, "121089333")
    assert a.tx_count == 169 and a.raw_bytes == b.raw_bytes


def test_unknown_block(mock):
    with pytest.raises(ni.UnknownBlockError):
        ni.fetch_block(mock.url, 1)


def test_rpc_error_object(mock):
    mock.rpc_error = {"name": "REQUEST_VALIDATION_ERROR", "cause": {"name": "PARSE_ERROR"}, "code": -32700}
    try:
        with pytest.raises(ni.RpcError) as info:
            ni.fetch_block(mock.url, 121114606)
        assert not isinstance(info.value, ni.UnknownBlockError)
        assert info.value.payload["code"] == -32700
    finally:
        mock.rpc_error = None


def test_single_retry_on_server_error(mock):
    mock.fail_next = 1
    assert ni.fetch_block(mock.url, 121117653).tx_count == 102
    mock.fail_next = 2
    with pytest.raises(ni.RpcTransportError):
        ni.fetch_block(mock.url, 121117653)
    mock.fail_next = 0


def test_timeout(mock):
    mock.delay = 0.5
    try:
        with pytest.raises(ni.RpcTimeoutError):
            ni.fetch_block(mock.url, 121114606, timeout=0.1)
    finally:
        mock.delay = 0.0


def test_unreachable_endpoint():
    s = socket.socket()
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]
    s.close()
    with pytest.raises(ni.RpcTransportError):
        ni.fetch_block(f"http://127.0.0.1:{port}", 1, timeout=1)


def test_endpoint_env(monkeypatch):
    monkeypatch.setenv(ni.RPC_ENV, "http://example.invalid")
    assert ni.default_endpoint() == "http://example.invalid"
    monkeypatch.delenv(ni.RPC_ENV)
    assert ni.default_endpoint() == ni.DEFAULT_RPC_URL


def test_save_fixture_roundtrip(tmp_path, mock):
    rec = ni.fetch_block(mock.url, 121136789)
    man = ni.save_fixture(rec, tmp_path / "block-121136789.bin")
    again = ni.load_fixture("block-121136789", tmp_path)
    assert again.raw_bytes == rec.raw_bytes and man.tx_count == 78
    assert ni.FixtureManifest.parse(man.to_text()) == man
