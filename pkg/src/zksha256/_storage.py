"""Scratch arrays that spill to disk-backed memory maps when large."""
import os
import shutil
import tempfile
import threading
import weakref

import numpy as np

# arrays at or above this many bytes are file-backed
SPILL_BYTES = int(os.environ.get("ZKSHA256_SPILL_BYTES", 192 << 20))


class Scratch:
    """Owns a temporary directory; arrays allocated here die with it."""

    def __init__(self, spill_bytes: int | None = None):
        self.spill_bytes = SPILL_BYTES if spill_bytes is None else spill_bytes
        self._dir = None
        self._count = 0
        self._lock = threading.Lock()
        self._finalizer = None

    def _path(self) -> str:
        with self._lock:
            if self._dir is None:
                self._dir = tempfile.mkdtemp(prefix="zksha256-")
                self._finalizer = weakref.finalize(self, shutil.rmtree, self._dir, True)
            self._count += 1
            return os.path.join(self._dir, f"a{self._count}.bin")

    def empty(self, shape, dtype=np.uint64) -> np.ndarray:
        shape = tuple(shape) if isinstance(shape, (tuple, list)) else (shape,)
        nbytes = int(np.prod(shape, dtype=np.int64)) * np.dtype(dtype).itemsize
        if nbytes < self.spill_bytes:
            return np.empty(shape, dtype=dtype)
        # plain ndarray view: compiled kernels reject the memmap subclass
        return np.asarray(np.memmap(self._path(), dtype=dtype, mode="w+", shape=shape))

    def zeros(self, shape, dtype=np.uint64) -> np.ndarray:
        nbytes = int(np.prod(shape, dtype=np.int64)) * np.dtype(dtype).itemsize
        a = self.empty(shape, dtype)
        if nbytes < self.spill_bytes:
            a.fill(0)
        return a  # fresh file mappings read as zero

    def close(self) -> None:
        if self._finalizer is not None:
            self._finalizer()
