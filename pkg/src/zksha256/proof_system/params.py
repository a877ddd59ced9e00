"""Prover/verifier parameters; echoed into every proof and artifact."""
from __future__ import annotations

import struct
from dataclasses import dataclass

DEFAULT_DOMAIN_TAG = b"ZKSHA256-PLNKFRI"
_FMT = "<QQQ16s"


class ParamsError(ValueError):
    pass


@dataclass(frozen=True)
class ProverParams:
    blowup_log: int = 3
    num_queries: int = 32
    fri_stop_degree: int = 8
    transcript_domain_tag: bytes = DEFAULT_DOMAIN_TAG

    def __post_init__(self):
        if self.blowup_log < 1 or self.blowup_log > 8:
            raise ParamsError("blowup_log must be in [1, 8]")
        if self.num_queries < 1 or self.num_queries > 1024:
            raise ParamsError("num_queries must be in [1, 1024]")
        if self.fri_stop_degree < 1 or self.fri_stop_degree > (1 << 20):
            raise ParamsError("fri_stop_degree must be in [1, 2^20]")
        if not isinstance(self.transcript_domain_tag, bytes) or len(self.transcript_domain_tag) != 16:
            raise ParamsError("transcript_domain_tag must be 16 bytes")

    @property
    def blowup(self) -> int:
        return 1 << self.blowup_log

    def conjectured_security_bits(self) -> int:
        return self.blowup_log * self.num_queries

    SIZE = struct.calcsize(_FMT)

    def to_bytes(self) -> bytes:
        return struct.pack(_FMT, self.blowup_log, self.num_queries, self.fri_stop_degree,
                           self.transcript_domain_tag)

    @classmethod
    def from_bytes(cls, data: bytes) -> "ProverParams":
        if len(data) != cls.SIZE:
            raise ParamsError("bad parameter encoding length")
        b, q, s, tag = struct.unpack(_FMT, data)
        return cls(b, q, s, tag)

    def with_overrides(self, **kw) -> "ProverParams":
        vals = dict(blowup_log=self.blowup_log, num_queries=self.num_queries,
                    fri_stop_degree=self.fri_stop_degree, transcript_domain_tag=self.transcript_domain_tag)
        vals.update({k: v for k, v in kw.items() if v is not None})
        return ProverParams(**vals)


def parse_overrides(spec: str | None, base: ProverParams | None = None) -> ProverParams:
    """Parse "blowup=3,queries=32,stop=8" style overrides."""
    base = base or ProverParams()
    if not spec:
        return base
    names = {"blowup": "blowup_log", "blowup_log": "blowup_log", "queries": "num_queries",
             "num_queries": "num_queries", "stop": "fri_stop_degree", "fri_stop_degree": "fri_stop_degree"}
    kw = {}
    for item in spec.split(","):
        if not item.strip():
            continue
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or key not in names:
            raise ParamsError(f"unknown parameter {key!r}")
        try:
            kw[names[key]] = int(val)
        except ValueError:
            raise ParamsError(f"parameter {key!r} needs an integer") from None
    return base.with_overrides(**kw)
