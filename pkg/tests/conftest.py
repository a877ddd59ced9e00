import hashlib
from dataclasses import dataclass

import pytest
from hypothesis import HealthCheck, settings

from zksha256.proof_system import ProverParams, prove, setup
from zksha256.sha256 import block_count, build_sha256_circuit, generate_witness

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@dataclass
class Proven:
    message: bytes
    layout: object
    witness: object
    publics: list
    key: object
    vd: object
    proof: object

    @property
    def circuit(self):
        return self.layout.circuit


def prove_message(message: bytes, params=None, workers=1) -> Proven:
    params = params or ProverParams()
    layout = build_sha256_circuit(block_count(len(message)))
    key, vd = setup(layout.circuit, params, workers)
    witness, publics = generate_witness(layout, message)
    proof = prove(layout.circuit, witness, publics, params, key=key, workers=workers)
    return Proven(message, layout, witness, publics, key, vd, proof)


@pytest.fixture(scope="session")
def one_block():
    """Honest proof for a 10-byte message (one compression block)."""
    return prove_message(hashlib.sha256(b"seed").digest()[:10])
