"""End-to-end acceptance criteria; each test prints one PASS/FAIL line."""
import hashlib
import struct
import time

import numpy as np
import pytest

from conftest import prove_message
from sha256_oracle import sha256 as oracle_sha256
from test_fri import _codeword, _prove_verify
from zksha256 import bench, near_ingest, store
from zksha256.cli import main as cli_main
from zksha256.proof_system import Proof, ProverParams, VerifierData, verify
from zksha256.proof_system.params import ProverParams as _PP
from zksha256.proof_system.proof import TRACE_TREES
from zksha256.sha256 import Sha256Layout, digest

SIZES = (10, 100, 1000, 10000)
UNREAD_REGIONS = frozenset()  # the proof encoding has no padding or reserved bytes


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'} {title}: {detail}")
        assert ok, detail
    return emit


@pytest.fixture(scope="module")
def suite():
    cfg = bench.BenchConfig(sizes=SIZES, repeats=1, fixtures=near_ingest.FIXTURE_NAMES)
    t0 = time.perf_counter()
    records = bench.run_suite(cfg)
    return records, time.perf_counter() - t0


def _by_label(records):
    return {r.label: r for r in records}


def test_c01_fips_and_oracle(report):
    t0 = time.perf_counter()
    ok = digest(b"").hex() == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
    ok &= digest(b"abc").hex() == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    rng = np.random.default_rng(500)
    bad = 0
    for _ in range(500):
        m = rng.bytes(int(rng.integers(0, 301)))
        bad += digest(m).value != oracle_sha256(m) or digest(m).value != hashlib.sha256(m).digest()
    dt = time.perf_counter() - t0
    report(1, "FIPS vectors and 500 oracle messages", ok and bad == 0 and dt < 5,
           f"fips={'ok' if ok else 'bad'} mismatches={bad} runtime={dt:.2f}s (< 5 s)")


def test_c02_completeness(report, suite):
    records, dt = suite
    labels = [r.label for r in records]
    expected = [f"random-{s}" for s in SIZES] + [f"block-{near_ingest.load_fixture(n).height}"
                                                 for n in near_ingest.FIXTURE_NAMES]
    # run_suite re-verifies each proof and compares the proven digest with the native digest before recording
    report(2, "prove/verify for 4 sizes and 4 fixtures", labels == expected and dt <= 15 * 60,
           f"{len(records)} cases verified, suite runtime {dt:.0f}s (<= 900 s)")


def _proof_regions(raw: bytes):
    """(start, end, name) for every field of an encoded proof."""
    p = Proof.from_bytes(raw)
    out, off = [], 0

    def add(name, size):
        nonlocal off
        out.append((off, off + size, name))
        off += size

    add("params", _PP.SIZE)
    add("log_n", 8)
    add("publics_count", 8)
    add("publics", 8 * len(p.publics))
    for r in ("wire_root", "z_root", "t_root"):
        add(r, 32)
    add("evals_count", 8)
    add("evals", p.evals.size * 8)
    add("fri_roots_count", 8)
    add("fri_roots", 32 * len(p.fri.roots))
    add("final_count", 8)
    add("final_coeffs", p.fri.final_coeffs.size * 8)
    add("num_queries", 8)
    names = list(TRACE_TREES) + [f"fri{i}" for i in range(len(p.fri.openings))]
    for name, op in zip(names, list(p.trace_openings) + list(p.fri.openings)):
        add(f"{name}.shape", 24)
        add(f"{name}.values", op.values.size * 8)
        add(f"{name}.paths", op.paths.size)
    assert off == len(raw)
    return out


def test_c03_soundness_sweep(report, one_block):
    raw = one_block.proof.to_bytes()
    vd, publics, cdig = one_block.vd, one_block.publics, one_block.circuit.digest()
    assert verify(cdig, vd, publics, raw)
    regions = _proof_regions(raw)
    buf = bytearray(raw)
    accepted = []
    t0 = time.perf_counter()
    for i in range(len(buf)):
        buf[i] ^= 0xFF
        if verify(cdig, vd, publics, bytes(buf)):
            accepted.append(i)
        buf[i] ^= 0xFF
    dt = time.perf_counter() - t0
    rate = 1 - len(accepted) / len(raw)
    region_of = lambda i: next(name for a, b, name in regions if a <= i < b)
    unexplained = [i for i in accepted if region_of(i) not in UNREAD_REGIONS]

    rng = np.random.default_rng(100)
    params = ProverParams()
    fri_rejected = sum(not _prove_verify(_codeword(rng, 64, 3, random=True), 64, params) for _ in range(100))
    report(3, "single-byte flips and random FRI vectors",
           rate >= 0.99 and not unexplained and fri_rejected == 100,
           f"{len(raw) - len(accepted)}/{len(raw)} flips rejected ({rate:.4%}), "
           f"{len(accepted)} accepted, {len(unexplained)} unexplained, sweep {dt:.0f}s; "
           f"FRI random vectors rejected {fri_rejected}/100")


def test_c04_gate_proportionality(report, suite):
    recs = _by_label(suite[0])
    xs = [recs[f"random-{s}"].block_count for s in SIZES]
    ys = [recs[f"random-{s}"].circuit_gates for s in SIZES]
    res = bench.affine_residual(xs, ys)
    report(4, "gates affine in block count", xs == [1, 2, 16, 157] and res < 0.05,
           f"blocks={xs} gates={ys} max relative residual {res:.5f} (< 0.05)")


def test_c05_verification_flatness(report, suite):
    recs = _by_label(suite[0])
    lo, hi = recs["random-10"].verify_seconds, recs["random-10000"].verify_seconds
    ratio = hi / lo
    report(5, "verify time 10000 B vs 10 B", ratio <= 3,
           f"{hi * 1e3:.2f} ms / {lo * 1e3:.2f} ms = {ratio:.2f} (<= 3)")


def test_c06_proof_size_structure(report, suite):
    records = suite[0]
    recs = _by_label(records)
    blocks = [r for r in records if r.label.startswith("block-")]
    by_n = {}
    for r in records:
        log_n = (r.circuit_gates - 1).bit_length()
        by_n.setdefault(log_n, set()).add(r.proof_bytes)
    same_n_same_size = all(len(v) == 1 for v in by_n.values())
    first3 = {r.proof_bytes for r in blocks[:3]}
    ratio = recs["random-10000"].proof_bytes / recs["random-100"].proof_bytes
    report(6, "proof length depends only on trace size",
           same_n_same_size and len(first3) == 1 and ratio <= 2,
           f"sizes by log n {dict(sorted((k, sorted(v)) for k, v in by_n.items()))}; "
           f"three fixtures share {sorted(first3)}; 10000/100 ratio {ratio:.3f} (<= 2)")


def test_c07_determinism(report):
    msg = bench.random_input(bench.DEFAULT_SEED, 100)
    assert msg == bench.random_input(bench.DEFAULT_SEED, 100)
    a = prove_message(msg, workers=1)
    b = prove_message(msg, workers=1)
    proofs = {a.proof.to_bytes(), b.proof.to_bytes()}
    for w in (2, 4):
        proofs.add(prove_message(msg, workers=w).proof.to_bytes())
    report(7, "byte-identical proofs across runs and thread counts", len(proofs) == 1,
           f"{len(proofs)} distinct encoding(s) over runs with 1, 1, 2, 4 workers")


def test_c08_digest_gate(report, tmp_path, capsys):
    assert cli_main(["prove", "--random", "10", "--out", str(tmp_path / "p")]) == 0
    hexd = digest(bench.random_input(bench.DEFAULT_SEED, 10)).hex()
    base = ["verify", "--proof", str(tmp_path / "p"), "--verifier-data", str(tmp_path / "p.vd")]
    honest = cli_main(base + ["--expect-digest", hexd])
    codes = set()
    for pos in range(64):
        for d in "0123456789abcdef":
            if d != hexd[pos]:
                codes.add(cli_main(base + ["--expect-digest", hexd[:pos] + d + hexd[pos + 1:]]))
    capsys.readouterr()
    report(8, "verify fails on any wrong hex digit", honest == 0 and codes == {1},
           f"honest exit {honest}; 960 altered digests gave exit codes {sorted(codes)}")


def test_c09_persistence(report, one_block, tmp_path):
    pv = one_block
    params = pv.vd.params
    store.save_artifact(store.ArtifactKind.PROOF, pv.proof.to_bytes(), tmp_path / "p", params)
    store.save_artifact(store.ArtifactKind.CIRCUIT, pv.layout.to_bytes(), tmp_path / "c", params)
    store.save_artifact(store.ArtifactKind.VERIFIER_DATA, pv.vd.to_bytes(), tmp_path / "v", params)
    layout = Sha256Layout.from_bytes(store.load_artifact(tmp_path / "c", store.ArtifactKind.CIRCUIT))
    vd = VerifierData.from_bytes(store.load_artifact(tmp_path / "v", store.ArtifactKind.VERIFIER_DATA))
    proof = Proof.from_bytes(store.load_artifact(tmp_path / "p", store.ArtifactKind.PROOF))
    roundtrip = verify(layout.circuit.digest(), vd, proof.publics, proof)

    good = (tmp_path / "p").read_bytes()
    cases = {
        "payload bit flip": (good[:store.HEADER_SIZE + 100] + bytes([good[store.HEADER_SIZE + 100] ^ 1])
                             + good[store.HEADER_SIZE + 101:], store.DigestMismatchError),
        "bad magic": (b"X" + good[1:], store.BadMagicError),
        "version": (good[:8] + struct.pack("<H", 99) + good[10:], store.VersionMismatchError),
        "truncated": (good[:-5], store.TruncatedArtifactError),
        "trailing": (good + b"\0", store.TruncatedArtifactError),
        "params echo": (good[:12] + bytes(8) + good[20:], store.MalformedHeaderError),
    }
    typed = {}
    for name, (data, err) in cases.items():
        (tmp_path / "bad").write_bytes(data)
        try:
            store.load_artifact(tmp_path / "bad", store.ArtifactKind.PROOF)
            typed[name] = False
        except err:
            typed[name] = True
    try:
        store.load_artifact(tmp_path / "v", store.ArtifactKind.PROOF)
        typed["wrong kind"] = False
    except store.KindMismatchError:
        typed["wrong kind"] = True
    try:
        store.load_artifact(tmp_path / "absent")
        typed["missing file"] = False
    except store.ArtifactIOError:
        typed["missing file"] = True
    report(9, "artifacts round-trip and corruption is typed", roundtrip and all(typed.values()),
           f"round-trip verify={roundtrip}; typed errors {sum(typed.values())}/{len(typed)}")


def test_c10_bench_reports(report, suite, tmp_path):
    records = suite[0]
    bench.emit_csv(records, tmp_path / "b.csv")
    back = bench.parse_csv(tmp_path / "b.csv")
    md = bench.render_markdown(records).splitlines()
    rows = [line.split("|")[1].strip() for line in md[2:]]
    schema = [t for t, _ in bench.METRIC_ROWS]
    ref = bench.load_reference("random")
    ref_md = bench.render_markdown(ref)
    ref_ok = ("| Proof verification (seconds) | 0.0028 | 0.0029 | 0.0037 | 0.0044 |" in ref_md
              and len(ref_md.splitlines()) == 14)
    sizes = [r for r in records if r.label.startswith("random-")]
    side = bench.emit_plot(sizes, tmp_path / "fig.svg")
    pts = (tmp_path / "fig.svg").read_text()
    overlay = "reference (10000, 0.0044 s)" in pts and "reference,10000,0.0044" in side.read_text()
    report(10, "bench CSV/markdown schema, reference table and plot overlay",
           back == records and [r for r in rows if r != "Transactions"] == schema and ref_ok and overlay,
           f"csv round-trip={back == records}, {len(schema)} metric rows, reference renders={ref_ok}, "
           f"overlay point present={overlay}")
