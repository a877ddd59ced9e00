"""Batch SHA-256 for Merkle trees.

Uses libcrypto's SHA256_Init/Update/Final through ctypes function pointers
called from compiled loops; these cannot be cached by numba, so they are
compiled lazily on first use.  Without libcrypto everything falls back to
hashlib loops with identical output.
"""
import ctypes
import ctypes.util
import hashlib
import threading

import numba as nb
import numpy as np

LEAF_PREFIX = b"\x00"
NODE_PREFIX = b"\x01"


def _load():
    name = ctypes.util.find_library("crypto")
    if not name:
        return None
    try:
        lib = ctypes.CDLL(name)
        addrs = [ctypes.cast(getattr(lib, f), ctypes.c_void_p).value
                 for f in ("SHA256_Init", "SHA256_Update", "SHA256_Final")]
    except (OSError, AttributeError):
        return None
    vp, sz = ctypes.c_void_p, ctypes.c_size_t
    init = ctypes.CFUNCTYPE(ctypes.c_int, vp)(addrs[0])
    update = ctypes.CFUNCTYPE(ctypes.c_int, vp, vp, sz)(addrs[1])
    final = ctypes.CFUNCTYPE(ctypes.c_int, vp, vp)(addrs[2])
    return init, update, final


_FUNCS = _load()
HAVE_OPENSSL = _FUNCS is not None
_CTX_BYTES = 256  # generous upper bound on sizeof(SHA256_CTX)

_compiled = None
_compile_lock = threading.Lock()


def _build():
    init, update, final = _FUNCS

    @nb.njit(nogil=True)
    def leaves(cols, width, nodes, first_leaf, lo, hi, ctx, buf, prefix):
        # leaf l covers positions l + k*(N/width), k < width; value bytes are
        # little-endian u64 in (k, column) order
        n_cols = cols.shape[0]
        stride = cols.shape[1] // width
        c = ctx.ctypes.data
        b = buf.ctypes.data
        o = nodes.ctypes.data
        pf = prefix.ctypes.data
        length = 8 * width * n_cols
        for leaf in range(lo, hi):
            j = 0
            for k in range(width):
                pos = leaf + k * stride
                for col in range(n_cols):
                    buf[j] = cols[col, pos]
                    j += 1
            init(c)
            update(c, pf, 1)
            update(c, b, length)
            final(o + 32 * (first_leaf + leaf), c)

    @nb.njit(nogil=True)
    def internal(nodes, lo, hi, ctx, prefix):
        c = ctx.ctypes.data
        o = nodes.ctypes.data
        pf = prefix.ctypes.data
        for i in range(hi - 1, lo - 1, -1):
            init(c)
            update(c, pf, 1)
            update(c, o + 64 * i, 64)
            final(o + 32 * i, c)

    @nb.njit(nogil=True)
    def check_paths(leaf_bytes, indices, paths, root, ctx, scratch):
        """Recompute roots for a batch of openings; False on the first mismatch."""
        c = ctx.ctypes.data
        s = scratch.ctypes.data
        q = leaf_bytes.shape[0]
        depth = paths.shape[1]
        leaf_len = leaf_bytes.shape[1]
        lb = np.empty(leaf_len + 1, dtype=np.uint8)
        lbp = lb.ctypes.data
        lb[0] = 0
        for i in range(q):
            for j in range(leaf_len):
                lb[j + 1] = leaf_bytes[i, j]
            init(c)
            update(c, lbp, leaf_len + 1)
            # scratch layout: [0x01][left 32][right 32]
            idx = indices[i]
            if depth == 0:
                final(s + 1, c)
            else:
                if idx & 1:
                    final(s + 33, c)
                    for j in range(32):
                        scratch[1 + j] = paths[i, 0, j]
                else:
                    final(s + 1, c)
                    for j in range(32):
                        scratch[33 + j] = paths[i, 0, j]
                for d in range(1, depth + 1):
                    idx >>= 1
                    init(c)
                    update(c, s, 65)
                    if d == depth:
                        final(s + 1, c)
                    elif idx & 1:
                        final(s + 33, c)
                        for j in range(32):
                            scratch[1 + j] = paths[i, d, j]
                    else:
                        final(s + 1, c)
                        for j in range(32):
                            scratch[33 + j] = paths[i, d, j]
            for j in range(32):
                if scratch[1 + j] != root[j]:
                    return False
        return True

    return leaves, internal, check_paths


def _kernels():
    global _compiled
    if _compiled is None:
        with _compile_lock:
            if _compiled is None:
                _compiled = _build()
    return _compiled


def hash_leaves(cols: np.ndarray, width: int, nodes: np.ndarray, first_leaf: int, lo: int, hi: int) -> None:
    """Write leaf hashes for leaves [lo, hi) into nodes[first_leaf + leaf]."""
    if HAVE_OPENSSL:
        leaves, _, _ = _kernels()
        ctx = np.zeros(_CTX_BYTES, dtype=np.uint8)
        buf = np.zeros(width * cols.shape[0], dtype=np.uint64)
        leaves(cols, width, nodes, first_leaf, lo, hi, ctx, buf, np.zeros(1, dtype=np.uint8))
        return
    stride = cols.shape[1] // width
    for leaf in range(lo, hi):
        block = cols[:, leaf + stride * np.arange(width)].T.astype("<u8").tobytes()
        nodes[first_leaf + leaf] = np.frombuffer(
            hashlib.sha256(LEAF_PREFIX + block).digest(), dtype=np.uint8)


def hash_internal(nodes: np.ndarray, lo: int, hi: int) -> None:
    """nodes[i] = H(0x01 || nodes[2i] || nodes[2i+1]) for i in [lo, hi), high to low."""
    if HAVE_OPENSSL:
        _, internal, _ = _kernels()
        ctx = np.zeros(_CTX_BYTES, dtype=np.uint8)
        internal(nodes, lo, hi, ctx, np.frombuffer(NODE_PREFIX, dtype=np.uint8).copy())
        return
    for i in range(hi - 1, lo - 1, -1):
        nodes[i] = np.frombuffer(
            hashlib.sha256(NODE_PREFIX + nodes[2 * i].tobytes() + nodes[2 * i + 1].tobytes()).digest(),
            dtype=np.uint8)


def check_paths(leaf_bytes: np.ndarray, indices: np.ndarray, paths: np.ndarray, root: bytes) -> bool:
    """Batch authentication-path check.  leaf_bytes: (Q, L) uint8, paths: (Q, depth, 32)."""
    root_arr = np.frombuffer(root, dtype=np.uint8)
    if HAVE_OPENSSL:
        _, _, check = _kernels()
        ctx = np.zeros(_CTX_BYTES, dtype=np.uint8)
        scratch = np.zeros(65, dtype=np.uint8)
        scratch[0] = 1
        return bool(check(leaf_bytes, indices, paths, root_arr, ctx, scratch))
    for i in range(leaf_bytes.shape[0]):
        h = hashlib.sha256(LEAF_PREFIX + leaf_bytes[i].tobytes()).digest()
        idx = int(indices[i])
        for d in range(paths.shape[1]):
            sib = paths[i, d].tobytes()
            h = hashlib.sha256(NODE_PREFIX + (sib + h if idx & 1 else h + sib)).digest()
            idx >>= 1
        if h != root:
            return False
    return True
