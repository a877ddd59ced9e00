"""Compiled kernels for Goldilocks arithmetic over numpy uint64 arrays.

All values are canonical representatives in [0, P).  Scalar helpers are
inlined into the vector kernels; everything here releases the GIL so the
prover can fan columns out over threads.
"""
import numba as nb
import numpy as np
from llvmlite import ir
from numba import types
from numba.extending import intrinsic

P_INT = 0xFFFFFFFF00000001
P = np.uint64(P_INT)
M32 = np.uint64(0xFFFFFFFF)
S32 = np.uint64(32)
ZERO = np.uint64(0)
ONE = np.uint64(1)
SEVEN = np.uint64(7)

_jit = dict(nogil=True, cache=True)


@intrinsic
def _mul_wide(typingctx, a, b):
    # full 64x64 -> 128 product, returned as (lo, hi)
    sig = types.UniTuple(types.uint64, 2)(types.uint64, types.uint64)

    def codegen(context, builder, signature, args):
        i128 = ir.IntType(128)
        prod = builder.mul(builder.zext(args[0], i128), builder.zext(args[1], i128))
        lo = builder.trunc(prod, ir.IntType(64))
        hi = builder.trunc(builder.lshr(prod, ir.Constant(i128, 64)), ir.IntType(64))
        return context.make_tuple(builder, signature.return_type, (lo, hi))

    return sig, codegen


@nb.njit(inline="always")
def mulmod(a, b):
    lo, hi = _mul_wide(a, b)
    # 2^64 = 2^32 - 1 and 2^96 = -1 (mod P)
    h1 = hi >> S32
    h0 = hi & M32
    t0 = lo - h1
    if lo < h1:
        t0 -= M32
    t1 = h0 * M32
    r = t0 + t1
    if r < t1:
        r += M32
    if r >= P:
        r -= P
    return r


@nb.njit(inline="always")
def addmod(a, b):
    r = a + b
    if r < a:
        r += M32
    elif r >= P:
        r -= P
    return r


@nb.njit(inline="always")
def submod(a, b):
    if a >= b:
        return a - b
    return a + (P - b)


@nb.njit(inline="always")
def negmod(a):
    if a == ZERO:
        return a
    return P - a


@nb.njit(inline="always")
def powmod(a, e):
    r = ONE
    base = a
    while e > 0:
        if e & 1:
            r = mulmod(r, base)
        base = mulmod(base, base)
        e >>= 1
    return r


@nb.njit(inline="always")
def invmod(a):
    return powmod(a, P - np.uint64(2))


@nb.njit(inline="always")
def ext_mul(a0, a1, b0, b1):
    c0 = addmod(mulmod(a0, b0), mulmod(SEVEN, mulmod(a1, b1)))
    c1 = addmod(mulmod(a0, b1), mulmod(a1, b0))
    return c0, c1


@nb.njit(inline="always")
def ext_inv(a0, a1):
    norm = submod(mulmod(a0, a0), mulmod(SEVEN, mulmod(a1, a1)))
    ni = invmod(norm)
    return mulmod(a0, ni), negmod(mulmod(a1, ni))


# ---------------------------------------------------------------- vectors

@nb.njit(**_jit)
def vmul(a, b, out):
    for i in range(a.shape[0]):
        out[i] = mulmod(a[i], b[i])


@nb.njit(**_jit)
def vadd(a, b, out):
    for i in range(a.shape[0]):
        out[i] = addmod(a[i], b[i])


@nb.njit(**_jit)
def vsub(a, b, out):
    for i in range(a.shape[0]):
        out[i] = submod(a[i], b[i])


@nb.njit(**_jit)
def vscale(a, c, out):
    for i in range(a.shape[0]):
        out[i] = mulmod(a[i], c)


@nb.njit(**_jit)
def geometric(start, ratio, out):
    acc = start
    for i in range(out.shape[0]):
        out[i] = acc
        acc = mulmod(acc, ratio)


@nb.njit(**_jit)
def batch_inverse(a, out):
    """Montgomery batch inversion; zero entries are left as zero."""
    n = a.shape[0]
    acc = ONE
    for i in range(n):
        out[i] = acc
        if a[i] != ZERO:
            acc = mulmod(acc, a[i])
    inv = invmod(acc)
    for i in range(n - 1, -1, -1):
        if a[i] != ZERO:
            t = mulmod(out[i], inv)
            inv = mulmod(inv, a[i])
            out[i] = t
        else:
            out[i] = ZERO


@nb.njit(**_jit)
def reduce_u64(a, out):
    for i in range(a.shape[0]):
        x = a[i]
        if x >= P:
            x -= P
        out[i] = x


# ---------------------------------------------------------------- NTT

@nb.njit(**_jit)
def fill_twiddles(top_root, log_size, tw):
    """tw[m + t] = w_{2m}^t for every power of two m < 2^log_size.

    top_root has order 2^log_size; lower levels are strided copies.
    """
    half = 1 << (log_size - 1)
    acc = ONE
    for t in range(half):
        tw[half + t] = acc
        acc = mulmod(acc, top_root)
    m = half >> 1
    while m >= 1:
        for t in range(m):
            tw[m + t] = tw[2 * m + 2 * t]
        m >>= 1
    tw[0] = ONE


_BLK = 1 << 12


@nb.njit(**_jit)
def dif(a, tw):
    """In-place Gentleman-Sande transform: natural order in, bit-reversed out."""
    n = a.shape[0]
    blk = min(n, _BLK)
    m = n >> 1
    while m >= blk:
        for k in range(0, n, 2 * m):
            for t in range(m):
                w = tw[m + t]
                u = a[k + t]
                v = a[k + t + m]
                a[k + t] = addmod(u, v)
                a[k + t + m] = mulmod(submod(u, v), w)
        m >>= 1
    for base in range(0, n, blk):
        mm = blk >> 1
        while mm >= 1:
            for k in range(base, base + blk, 2 * mm):
                for t in range(mm):
                    w = tw[mm + t]
                    u = a[k + t]
                    v = a[k + t + mm]
                    a[k + t] = addmod(u, v)
                    a[k + t + mm] = mulmod(submod(u, v), w)
            mm >>= 1


@nb.njit(**_jit)
def dit_from(a, tw, m0):
    """In-place Cooley-Tukey transform: bit-reversed order in, natural out.

    Levels below m0 are skipped; callers use this when every aligned block of
    m0 entries is already constant, which is what those levels would produce
    from a block holding one nonzero leading entry.
    """
    n = a.shape[0]
    blk = min(n, _BLK)
    if m0 < blk:
        for base in range(0, n, blk):
            m = m0
            while m < blk:
                for k in range(base, base + blk, 2 * m):
                    for t in range(m):
                        w = tw[m + t]
                        u = a[k + t]
                        v = mulmod(a[k + t + m], w)
                        a[k + t] = addmod(u, v)
                        a[k + t + m] = submod(u, v)
                m <<= 1
        m = blk
    else:
        m = m0
    while m < n:
        for k in range(0, n, 2 * m):
            for t in range(m):
                w = tw[m + t]
                u = a[k + t]
                v = mulmod(a[k + t + m], w)
                a[k + t] = addmod(u, v)
                a[k + t + m] = submod(u, v)
        m <<= 1


@nb.njit(**_jit)
def dit(a, tw):
    """In-place Cooley-Tukey transform: bit-reversed order in, natural out."""
    dit_from(a, tw, 1)


@nb.njit(**_jit)
def bitrev_powers(g, log_n, out):
    """out[i] = g^bitrev(i) over log_n bits."""
    out[0] = ONE
    for j in range(log_n):
        h = powmod(g, np.uint64(1) << np.uint64(log_n - 1 - j))
        lo = 1 << j
        for i in range(lo):
            out[lo + i] = mulmod(out[i], h)


@nb.njit(**_jit)
def bitrev_permute(a):
    n = a.shape[0]
    j = 0
    for i in range(1, n):
        bit = n >> 1
        while j & bit:
            j ^= bit
            bit >>= 1
        j ^= bit
        if i < j:
            t = a[i]
            a[i] = a[j]
            a[j] = t


@nb.njit(**_jit)
def scatter_strided(src, out, stride, offset):
    for i in range(src.shape[0]):
        out[i * stride + offset] = src[i]


@nb.njit(**_jit)
def interleave(rows, out):
    """out[i * B + r] = rows[r, i]."""
    b = rows.shape[0]
    n = rows.shape[1]
    for i in range(n):
        base = i * b
        for r in range(b):
            out[base + r] = rows[r, i]


@nb.njit(**_jit)
def horner_ext(c0, c1, x0, x1):
    """Evaluate an extension-coefficient polynomial at an extension point."""
    r0 = ZERO
    r1 = ZERO
    for i in range(c0.shape[0] - 1, -1, -1):
        r0, r1 = ext_mul(r0, r1, x0, x1)
        r0 = addmod(r0, c0[i])
        r1 = addmod(r1, c1[i])
    return r0, r1


@nb.njit(**_jit)
def eval_base_at_ext(coeffs, x0, x1):
    """Base-coefficient polynomial evaluated at an extension point."""
    r0 = ZERO
    r1 = ZERO
    for i in range(coeffs.shape[0] - 1, -1, -1):
        r0, r1 = ext_mul(r0, r1, x0, x1)
        r0 = addmod(r0, coeffs[i])
    return r0, r1


@nb.njit(**_jit)
def bitrev_powers_ext(x0, x1, log_n, out0, out1):
    """out[i] = x^bitrev(i) for an extension point x."""
    out0[0] = ONE
    out1[0] = ZERO
    h0 = x0
    h1 = x1
    hs0 = np.empty(max(log_n, 1), dtype=np.uint64)
    hs1 = np.empty(max(log_n, 1), dtype=np.uint64)
    for j in range(log_n):
        # h = x^(2^j); used for bit (log_n - 1 - j)
        hs0[j] = h0
        hs1[j] = h1
        h0, h1 = ext_mul(h0, h1, h0, h1)
    for j in range(log_n):
        g0 = hs0[log_n - 1 - j]
        g1 = hs1[log_n - 1 - j]
        lo = 1 << j
        for i in range(lo):
            out0[lo + i], out1[lo + i] = ext_mul(out0[i], out1[i], g0, g1)


@nb.njit(**_jit)
def dot_base_ext(c, t0, t1):
    r0 = ZERO
    r1 = ZERO
    for i in range(c.shape[0]):
        v = c[i]
        r0 = addmod(r0, mulmod(v, t0[i]))
        r1 = addmod(r1, mulmod(v, t1[i]))
    return r0, r1
