"""SHA-256 digests proven with a PLONK-style arithmetization and FRI commitments."""
__version__ = "0.1.0"
