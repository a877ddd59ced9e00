"""zksha256 command line.

Exit codes: 0 success, 1 verification or digest mismatch, 2 usage or malformed input.
Failures print one line to stderr: ``zksha256: <category>: <message>``.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench, near_ingest, store
from .circuit import CircuitError
from .proof_system import ParamsError, Proof, ProofFormatError, VerifierData, VerifierDataError, parse_overrides
from .proof_system import prove as _prove
from .proof_system import setup, verify as _verify
from .sha256 import Sha256Layout, block_count, build_sha256_circuit, digest, generate_witness, publics_digest

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class CliError(Exception):
    def __init__(self, category: str, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.category = category
        self.code = code


def _diag(category: str, message: str) -> None:
    print(f"zksha256: {category}: {' '.join(str(message).split())}", file=sys.stderr)


def _read_message(args) -> bytes:
    if getattr(args, "hex", None) is not None:
        try:
            return bytes.fromhex(args.hex)
        except ValueError:
            raise CliError("malformed-input", "--hex is not valid hexadecimal") from None
    if getattr(args, "input", None) is not None:
        try:
            return Path(args.input).read_bytes()
        except OSError as e:
            raise CliError("io", f"cannot read {args.input}: {e.strerror}") from None
    if getattr(args, "fixture", None) is not None:
        try:
            return near_ingest.load_fixture(args.fixture).raw_bytes
        except near_ingest.FixtureIntegrityError as e:
            raise CliError("fixture", str(e)) from None
    if getattr(args, "random", None) is not None:
        if args.random < 0:
            raise CliError("malformed-input", "--random must be non-negative")
        return bench.random_input(args.seed, args.random)
    raise CliError("usage", "no input given")


def _params(text):
    try:
        return parse_overrides(text)
    except ParamsError as e:
        raise CliError("params", str(e)) from None


def cmd_digest(args) -> int:
    print(digest(_read_message(args)).hex())
    return EXIT_OK


def cmd_prove(args) -> int:
    message = _read_message(args)
    params = _params(args.params)
    layout = build_sha256_circuit(block_count(len(message)))
    circuit = layout.circuit
    key, vd = setup(circuit, params, args.workers)
    witness, publics = generate_witness(layout, message)
    proof = _prove(circuit, witness, publics, params, key=key, workers=args.workers)
    key.scratch.close()
    out = Path(args.out)
    vd_out = Path(args.vd_out) if args.vd_out else out.with_name(out.name + ".vd")
    try:
        store.save_artifact(store.ArtifactKind.PROOF, proof.to_bytes(), out, params)
        if args.circuit_out:
            store.save_artifact(store.ArtifactKind.CIRCUIT, layout.to_bytes(), args.circuit_out, params)
        store.save_artifact(store.ArtifactKind.VERIFIER_DATA, vd.to_bytes(), vd_out, params)
    except store.StoreError as e:
        raise CliError("io", str(e)) from None
    print(f"digest={publics_digest(proof.publics).hex()}")
    print(f"input_bytes={len(message)}")
    print(f"blocks={layout.num_blocks}")
    print(f"gates={circuit.gate_count()}")
    print(f"proof={out} proof_bytes={out.stat().st_size}")
    if args.circuit_out:
        print(f"circuit={args.circuit_out} circuit_bytes={Path(args.circuit_out).stat().st_size}")
    print(f"verifier_data={vd_out} verifier_data_bytes={vd_out.stat().st_size}")
    return EXIT_OK


def _load(path, kind):
    try:
        return store.load_artifact(path, kind, with_header=True)
    except store.StoreError as e:
        raise CliError(type(e).__name__, f"{path}: {e}") from None


def cmd_verify(args) -> int:
    text = args.expect_digest.strip().lower()
    try:
        expected = bytes.fromhex(text)
    except ValueError:
        expected = b""
    if len(expected) != 32 or len(text) != 64:
        raise CliError("malformed-input", "--expect-digest must be 64 hex digits")
    _, proof_raw = _load(args.proof, store.ArtifactKind.PROOF)
    _, vd_raw = _load(args.verifier_data, store.ArtifactKind.VERIFIER_DATA)
    try:
        proof = Proof.from_bytes(proof_raw)
        vd = VerifierData.from_bytes(vd_raw)
    except (ProofFormatError, VerifierDataError) as e:
        raise CliError("malformed-input", str(e)) from None
    if args.circuit:
        _, layout_raw = _load(args.circuit, store.ArtifactKind.CIRCUIT)
        try:
            cdig = Sha256Layout.from_bytes(layout_raw).circuit.digest()
        except CircuitError as e:
            raise CliError("malformed-input", str(e)) from None
        if cdig != vd.circuit_digest:
            raise CliError("verification-failed", "circuit does not match verifier data", EXIT_FAIL)
    if not _verify(vd.circuit_digest, vd, proof.publics, proof):
        raise CliError("verification-failed", "proof rejected", EXIT_FAIL)
    got = publics_digest(proof.publics)
    if got != expected:
        raise CliError("digest-mismatch", f"proof attests {got.hex()}, expected {expected.hex()}", EXIT_FAIL)
    print(f"OK digest={got.hex()} input_bytes={int(proof.publics[8])}")
    return EXIT_OK


def cmd_fetch_block(args) -> int:
    block_id = args.height if args.height is not None else args.hash
    try:
        rec = near_ingest.fetch_block(args.rpc, block_id, timeout=args.timeout)
    except near_ingest.UnknownBlockError as e:
        raise CliError("unknown-block", str(e), EXIT_FAIL) from None
    except near_ingest.NearIngestError as e:
        raise CliError(type(e).__name__, str(e), EXIT_FAIL) from None
    try:
        man = near_ingest.save_fixture(rec, args.out)
    except OSError as e:
        raise CliError("io", f"cannot write {args.out}: {e.strerror}") from None
    print(f"height={man.height} hash={man.block_hash} tx_count={man.tx_count} "
          f"bytes={man.byte_length} sha256={man.sha256}")
    return EXIT_OK


def cmd_bench(args) -> int:
    fixtures = args.fixtures or []
    if fixtures == ["all"]:
        fixtures = list(near_ingest.FIXTURE_NAMES)
    sizes = args.sizes if args.sizes is not None else list(bench.DEFAULT_SIZES)
    try:
        config = bench.BenchConfig(sizes=sizes, seed=args.seed, repeats=args.repeats,
                                   heavy_repeats=args.heavy_repeats, params=_params(args.params),
                                   fixtures=fixtures, workers=args.workers)
        records = bench.run_suite(config, progress=lambda m: print(m, file=sys.stderr, flush=True))
    except bench.BenchError as e:
        raise CliError("bench", str(e), EXIT_FAIL) from None
    except near_ingest.FixtureIntegrityError as e:
        raise CliError("fixture", str(e)) from None
    try:
        bench.emit_csv(records, args.csv)
        if args.md:
            bench.emit_markdown(records, args.md)
        if args.plot:
            if len(records) >= 2:
                bench.emit_plot(records, args.plot)
            else:
                _diag("bench", "plot skipped: needs at least two records")
    except OSError as e:
        raise CliError("io", f"cannot write report: {e}") from None
    for r in records:
        print(bench.summary_line(r))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zksha256", description="Prove and verify SHA-256 computations.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("digest", help="print the SHA-256 digest of an input")
    g = d.add_mutually_exclusive_group(required=True)
    g.add_argument("--input", metavar="PATH")
    g.add_argument("--hex", metavar="BYTES")
    d.set_defaults(func=cmd_digest)

    pr = sub.add_parser("prove", help="prove the digest of an input")
    g = pr.add_mutually_exclusive_group(required=True)
    g.add_argument("--input", metavar="PATH")
    g.add_argument("--random", type=int, metavar="N", help="N seeded random bytes")
    g.add_argument("--fixture", metavar="NAME", help="a vendored NEAR block")
    pr.add_argument("--seed", type=int, default=bench.DEFAULT_SEED)
    pr.add_argument("--out", required=True, metavar="PROOF")
    pr.add_argument("--circuit-out", metavar="CIRC")
    pr.add_argument("--vd-out", metavar="VD", help="verifier data (default PROOF.vd)")
    pr.add_argument("--params", metavar="blowup=3,queries=32,stop=8")
    pr.add_argument("--workers", type=int, default=1)
    pr.set_defaults(func=cmd_prove)

    v = sub.add_parser("verify", help="verify a proof against an expected digest")
    v.add_argument("--proof", required=True)
    v.add_argument("--verifier-data", required=True)
    v.add_argument("--expect-digest", required=True, metavar="HEX")
    v.add_argument("--circuit", metavar="CIRC", help="optionally check the circuit file too")
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("fetch-block", help="fetch a NEAR block into fixture format")
    f.add_argument("--rpc", default=None, help=f"endpoint (default ${near_ingest.RPC_ENV} or mainnet archival)")
    g = f.add_mutually_exclusive_group(required=True)
    g.add_argument("--hash")
    g.add_argument("--height", type=int)
    f.add_argument("--out", required=True, metavar="PATH")
    f.add_argument("--timeout", type=float, default=near_ingest.DEFAULT_TIMEOUT)
    f.set_defaults(func=cmd_fetch_block)

    b = sub.add_parser("bench", help="run the benchmark suite")
    b.add_argument("--sizes", type=int, nargs="*", metavar="N")
    b.add_argument("--fixtures", nargs="*", metavar="NAME", help="fixture names, or 'all'")
    b.add_argument("--seed", type=int, default=bench.DEFAULT_SEED)
    b.add_argument("--repeats", type=int, default=5)
    b.add_argument("--heavy-repeats", type=int, default=1)
    b.add_argument("--params", metavar="blowup=3,queries=32,stop=8")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--csv", required=True, metavar="PATH")
    b.add_argument("--md", metavar="PATH")
    b.add_argument("--plot", metavar="PATH")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)  # exits 2 with usage on bad flags
    if getattr(args, "workers", 1) < 1:
        _diag("usage", "--workers must be positive")
        return EXIT_USAGE
    try:
        return args.func(args)
    except CliError as e:
        _diag(e.category, e)
        return e.code
    except CircuitError as e:
        _diag("circuit", e)
        return EXIT_USAGE
    except MemoryError:
        _diag("resources", "out of memory")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
