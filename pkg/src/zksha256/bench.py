"""Benchmark harness: native hashing, circuit generation, proving and verification.

Each phase is timed in seconds (monotonic clock) and in cycles.  Cycles come
from the x86 time-stamp counter when it can be read (its rate is calibrated
against the monotonic clock), otherwise from seconds multiplied by the clock
rate the OS reports; the ``cycle_source`` column says which.
"""
from __future__ import annotations

import csv
import ctypes
import dataclasses
import gc
import mmap
import platform
import statistics
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np

from . import near_ingest
from ._storage import Scratch
from .proof_system import ProverParams, prove, setup, verify
from .sha256 import block_count, build_sha256_circuit, digest, generate_witness, native_verify, publics_digest

DEFAULT_SIZES = (10, 100, 1000, 10000)
DEFAULT_SEED = 0x5EED_2024_0001
REFERENCE_CLOCK_HZ = 4.7e9  # stated as "MHz" alongside the reference tables; the cycle counts imply GHz

PHASES = ("native", "circuit_gen", "prove", "verify")


class BenchError(Exception):
    pass


# ---------------------------------------------------------------- cycle counter

_RDTSC_CODE = bytes.fromhex("0f31" "48c1e220" "4809d0" "c3")  # rdtsc; shl rdx,32; or rax,rdx; ret


def _rdtsc_reader():
    if platform.machine().lower() not in ("x86_64", "amd64"):
        return None, None
    try:
        buf = mmap.mmap(-1, mmap.PAGESIZE, prot=mmap.PROT_READ | mmap.PROT_WRITE | mmap.PROT_EXEC)
        buf.write(_RDTSC_CODE)
        addr = ctypes.addressof(ctypes.c_char.from_buffer(buf))
        fn = ctypes.CFUNCTYPE(ctypes.c_uint64)(addr)
        a = fn()
        b = fn()
        if b < a:
            return None, None
        return fn, buf  # keep the mapping alive
    except (OSError, ValueError, AttributeError):
        return None, None


def _nominal_clock_hz() -> float:
    """Clock rate reported by the OS, 1 GHz if unknown."""
    try:
        with open("/proc/cpuinfo") as fh:
            for line in fh:
                if line.lower().startswith("cpu mhz"):
                    return float(line.split(":")[1]) * 1e6
    except (OSError, ValueError, IndexError):
        pass
    return 1e9


class CycleCounter:
    """Hardware counter when available, else a calibrated software estimate."""

    def __init__(self, calibrate_seconds: float = 0.05, force_fallback: bool = False):
        self._fn, self._buf = (None, None) if force_fallback else _rdtsc_reader()
        self.source = "tsc" if self._fn else "calibrated"
        self.clock_hz = self._calibrate(calibrate_seconds)

    def _calibrate(self, seconds: float) -> float:
        if self._fn is not None:
            t0, c0 = time.perf_counter(), self._fn()
            while time.perf_counter() - t0 < seconds:
                pass
            return (self._fn() - c0) / (time.perf_counter() - t0)
        return _nominal_clock_hz()

    def read(self) -> int | None:
        return self._fn() if self._fn is not None else None


_COUNTER: CycleCounter | None = None


def cycle_counter() -> CycleCounter:
    global _COUNTER
    if _COUNTER is None:
        _COUNTER = CycleCounter()
    return _COUNTER


@dataclass(frozen=True)
class Measurement:
    seconds: float
    cycles: float
    result: object = None
    samples: int = 1


def measure(phase: Callable[[], object], repeats: int = 5, warmup: bool = True,
            counter: CycleCounter | None = None) -> Measurement:
    """Median seconds and cycles over ``repeats`` calls; a warm-up call is discarded."""
    counter = counter or cycle_counter()
    if warmup:
        phase()
    secs, cycs = [], []
    result = None
    for _ in range(max(1, repeats)):
        c0 = counter.read()
        t0 = time.perf_counter()
        result = phase()
        t1 = time.perf_counter()
        c1 = counter.read()
        secs.append(t1 - t0)
        cycs.append(float(c1 - c0) if c0 is not None else (t1 - t0) * counter.clock_hz)
    return Measurement(statistics.median(secs), statistics.median(cycs), result, len(secs))


# ---------------------------------------------------------------- records

@dataclass
class BenchRecord:
    label: str
    input_bytes: int
    block_count: int
    native_cycles: float
    native_seconds: float
    circuit_gen_cycles: float
    circuit_gen_seconds: float
    prove_cycles: float
    prove_seconds: float
    verify_cycles: float
    verify_seconds: float
    circuit_gates: int
    proof_bytes: int
    repeats: int
    clock_hz: float
    cycle_source: str = "tsc"
    prover_threads: int = 1
    tx_count: int | None = None

    def cycles_per_byte(self, phase: str) -> float:
        return getattr(self, f"{phase}_cycles") / max(self.input_bytes, 1)


_FIELDS = [f.name for f in dataclasses.fields(BenchRecord)]
_PER_BYTE = [f"{p}_cycles_per_byte" for p in PHASES]
CSV_COLUMNS = _FIELDS + _PER_BYTE


@dataclass
class BenchConfig:
    sizes: tuple = DEFAULT_SIZES
    seed: int = DEFAULT_SEED
    repeats: int = 5
    heavy_repeats: int = 1
    heavy_blocks: int = 32  # cases above this block count use heavy_repeats for generation phases
    params: ProverParams = field(default_factory=ProverParams)
    fixtures: tuple = ()
    workers: int = 1

    def __post_init__(self):
        self.sizes = tuple(int(s) for s in self.sizes)
        self.fixtures = tuple(self.fixtures)
        if not self.sizes and not self.fixtures:
            raise BenchError("nothing to benchmark: sizes and fixtures are both empty")
        if any(s < 0 for s in self.sizes):
            raise BenchError("sizes must be non-negative")
        if not 0 <= self.seed < 1 << 64:
            raise BenchError("seed must fit in 64 bits")
        if self.repeats < 1 or self.heavy_repeats < 1:
            raise BenchError("repeats must be positive")


def random_input(seed: int, size: int) -> bytes:
    """Seeded PCG64 stream, one independent stream per size."""
    return np.random.default_rng([seed, size]).bytes(size)


def bench_message(message: bytes, label: str, config: BenchConfig, tx_count: int | None = None,
                  counter: CycleCounter | None = None) -> BenchRecord:
    counter = counter or cycle_counter()
    params = config.params
    nb = block_count(len(message))
    heavy = nb > config.heavy_blocks
    reps = config.heavy_repeats if heavy else config.repeats
    expected = digest(message).value

    native = measure(lambda: native_verify(message, expected), max(config.repeats, 5), True, counter)

    def generate():
        scratch = Scratch()
        layout = build_sha256_circuit(nb)
        key, vd = setup(layout.circuit, params, config.workers, scratch)
        return layout, key, vd

    gen = measure(generate, reps, warmup=not heavy, counter=counter)
    layout, key, vd = gen.result
    gen = dataclasses.replace(gen, result=None)
    circuit = layout.circuit
    witness, publics = generate_witness(layout, message)

    pm = measure(lambda: prove(circuit, witness, publics, params, key=key, workers=config.workers),
                 reps, warmup=not heavy, counter=counter)
    proof_bytes = pm.result.to_bytes()
    cdig = circuit.digest()
    vm = measure(lambda: verify(cdig, vd, publics, proof_bytes), max(config.repeats, 5), True, counter)

    # re-check before the record is emitted: cryptographic verification and digest comparison
    if not verify(cdig, vd.to_bytes(), publics, proof_bytes):
        raise BenchError(f"{label}: proof failed verification")
    if publics_digest(pm.result.publics) != expected:
        raise BenchError(f"{label}: proven digest differs from native digest")

    record = BenchRecord(label, len(message), nb, native.cycles, native.seconds, gen.cycles, gen.seconds,
                         pm.cycles, pm.seconds, vm.cycles, vm.seconds, circuit.gate_count(),
                         len(proof_bytes), reps, counter.clock_hz, counter.source, config.workers, tx_count)
    key.scratch.close()
    del layout, key, vd, witness, pm, circuit
    gc.collect()
    return record


def run_suite(config: BenchConfig | None = None, progress: Callable[[str], None] | None = None,
              counter: CycleCounter | None = None) -> list[BenchRecord]:
    config = config or BenchConfig()
    records = []
    jobs = [(f"random-{s}", random_input(config.seed, s), None) for s in config.sizes]
    for name in config.fixtures:
        rec = near_ingest.load_fixture(name) if isinstance(name, str) else name
        jobs.append((f"block-{rec.height}", rec.raw_bytes, rec.tx_count))
    for label, msg, txs in jobs:
        if progress:
            progress(f"{label}: {len(msg)} bytes, {block_count(len(msg))} blocks")
        records.append(bench_message(msg, label, config, txs, counter))
    return records


# ---------------------------------------------------------------- reports

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_csv(records, path) -> None:
    records = list(records)
    if not records:
        raise BenchError("no records to write")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in records:
            row = [_fmt(getattr(r, f)) for f in _FIELDS]
            row += [repr(r.cycles_per_byte(p)) for p in PHASES]
            w.writerow(row)


def parse_csv(path) -> list[BenchRecord]:
    types = {f.name: f.type for f in dataclasses.fields(BenchRecord)}
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            kw = {}
            for name in _FIELDS:
                raw = row.get(name, "")
                t = types[name]
                if name == "tx_count":
                    kw[name] = int(raw) if raw else None
                elif t in ("str", str):
                    kw[name] = raw
                elif t in ("int", int):
                    kw[name] = int(raw)
                else:
                    kw[name] = float(raw)
            out.append(BenchRecord(**kw))
    return out


METRIC_ROWS = (
    ("Input length (bytes)", "input_bytes"),
    ("SHA-256 blocks", "block_count"),
    ("Native verification (cycles)", "native_cycles"),
    ("Native verification (seconds)", "native_seconds"),
    ("Circuit generation (cycles)", "circuit_gen_cycles"),
    ("Circuit generation (seconds)", "circuit_gen_seconds"),
    ("Proof generation (cycles)", "prove_cycles"),
    ("Proof generation (seconds)", "prove_seconds"),
    ("Proof verification (cycles)", "verify_cycles"),
    ("Proof verification (seconds)", "verify_seconds"),
    ("Circuit size (gates)", "circuit_gates"),
    ("Proof size (bytes)", "proof_bytes"),
)


def _cell(attr: str, v) -> str:
    if attr.endswith("_seconds"):
        return f"{v:.3g}" if v < 1e-3 else f"{v:.4f}" if v < 1 else f"{v:.2f}"
    if attr.endswith("_cycles"):
        return f"{int(round(v)):,}"
    return f"{int(v):,}"


def render_markdown(records) -> str:
    records = list(records)
    if not records:
        raise BenchError("no records to render")
    head = "| Metric | " + " | ".join(r.label for r in records) + " |"
    lines = [head, "|" + "---|" * (len(records) + 1)]
    if any(r.tx_count is not None for r in records):
        lines.append("| Transactions | " + " | ".join("" if r.tx_count is None else str(r.tx_count)
                                                     for r in records) + " |")
    for title, attr in METRIC_ROWS:
        lines.append(f"| {title} | " + " | ".join(_cell(attr, getattr(r, attr)) for r in records) + " |")
    return "\n".join(lines) + "\n"


def emit_markdown(records, path) -> None:
    Path(path).write_text(render_markdown(records))


def plot_points(records, reference=()) -> list[tuple[str, int, float]]:
    pts = [("measured", r.input_bytes, r.verify_seconds) for r in records]
    pts += [("reference", r.input_bytes, r.verify_seconds) for r in reference]
    return sorted(pts, key=lambda p: (p[0], p[1]))


def emit_plot(records, path, reference=None) -> Path:
    """SVG of verification time against input length, plus a sidecar CSV of the points.

    ``reference`` defaults to the shipped reference random-input table.
    """
    records = list(records)
    if len(records) < 2:
        raise BenchError("a plot needs at least two records")
    if reference is None:
        reference = load_reference("random")
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    pts = plot_points(records, reference)
    fig, ax = plt.subplots(figsize=(6, 4))
    for series, style in (("measured", "o-"), ("reference", "s--")):
        xs = [p[1] for p in pts if p[0] == series]
        ys = [p[2] for p in pts if p[0] == series]
        if xs:
            ax.plot(xs, ys, style, label=series)
    for _, x, y in (p for p in pts if p[0] == "reference" and p[1] == max(r.input_bytes for r in reference)):
        ax.annotate(f"reference ({x}, {y:g} s)", (x, y), textcoords="offset points", xytext=(-120, 8))
    ax.set_xscale("log")
    ax.set_xlabel("input length (bytes)")
    ax.set_ylabel("proof verification (seconds)")
    ax.set_ylim(bottom=0)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    try:
        fig.savefig(path, format="svg")
    finally:
        plt.close(fig)
    side = path.with_name(path.stem + ".points.csv")
    with open(side, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["series", "input_bytes", "verify_seconds"])
        for series, x, y in pts:
            w.writerow([series, x, repr(float(y))])
    return side


def load_reference(which: str = "random") -> list[BenchRecord]:
    """Reference tables shipped with the package ("random" or "near")."""
    name = {"random": "reference_random_inputs.csv", "near": "reference_near_blocks.csv"}[which]
    return parse_csv(Path(str(resources.files("zksha256") / "data" / name)))


def affine_residual(xs, ys) -> float:
    """Max relative residual of a least-squares fit y = a*x + b."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    a, b = np.polyfit(xs, ys, 1)
    return float(np.max(np.abs(ys - (a * xs + b)) / np.abs(ys)))


def flatness(records) -> float:
    v = [r.verify_seconds for r in records]
    return max(v) / min(v)


def summary_line(r: BenchRecord) -> str:
    return (f"{r.label}: {r.input_bytes} B, {r.block_count} blocks, gates {r.circuit_gates}, "
            f"gen {r.circuit_gen_seconds:.2f} s, prove {r.prove_seconds:.2f} s, "
            f"verify {r.verify_seconds * 1e3:.2f} ms, proof {r.proof_bytes} B")


__all__ = ["BenchConfig", "BenchError", "BenchRecord", "CycleCounter", "Measurement", "DEFAULT_SIZES", "summary_line",
           "METRIC_ROWS", "affine_residual", "emit_csv", "emit_markdown", "emit_plot", "flatness",
           "load_reference", "measure", "parse_csv", "random_input", "render_markdown", "run_suite"]
