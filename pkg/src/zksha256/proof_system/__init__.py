"""Prover and verifier: PLONK-style constraints with FRI-committed openings."""
from .commit import CommittedColumns, commit_columns
from .fri import FriProof, fri_prove, fri_verify
from .merkle import MerkleCommitment, MerkleTree, merkle_open, merkle_verify
from .params import DEFAULT_DOMAIN_TAG, ParamsError, ProverParams, parse_overrides
from .plonk import ProverError, ProverKey, VerifierData, VerifierDataError, prove, setup, verify
from .proof import Proof, ProofFormatError
from .transcript import Transcript

__all__ = [
    "CommittedColumns", "commit_columns", "FriProof", "fri_prove", "fri_verify",
    "MerkleCommitment", "MerkleTree", "merkle_open", "merkle_verify",
    "DEFAULT_DOMAIN_TAG", "ParamsError", "ProverParams", "parse_overrides",
    "ProverError", "ProverKey", "VerifierData", "VerifierDataError", "prove", "setup", "verify",
    "Proof", "ProofFormatError", "Transcript",
]
