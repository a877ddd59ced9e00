"""Compiled loops for the prover and verifier.

Extension elements travel as (c0, c1) pairs of uint64 with phi^2 = 7.
"""
import numba as nb
import numpy as np

from .._kernels import (ONE, P, SEVEN, ZERO, _jit, addmod, ext_mul, invmod, mulmod,
                        powmod, submod)

INV2 = np.uint64((int(P) + 1) // 2)
K1 = SEVEN
K2 = np.uint64(49)


@nb.njit(**_jit)
def broadcast_scaled(coeffs_br, spow, out, stride):
    """out[i * stride + r] = coeffs_br[i] * spow[i] for r < stride."""
    for i in range(coeffs_br.shape[0]):
        v = mulmod(coeffs_br[i], spow[i])
        base = i * stride
        for r in range(stride):
            out[base + r] = v


@nb.njit(**_jit)
def sub_one(a):
    for i in range(a.shape[0]):
        a[i] = submod(a[i], ONE)


@nb.njit(inline="always")
def _factor(w, v, b0, b1, g0, g1):
    # w + beta * v + gamma, w and v in the base field
    return addmod(addmod(w, mulmod(b0, v)), g0), addmod(mulmod(b1, v), g1)


@nb.njit(inline="always")
def _prod3(x0, x1, y0, y1, z0, z1):
    r0, r1 = ext_mul(x0, x1, y0, y1)
    return ext_mul(r0, r1, z0, z1)


@nb.njit(**_jit)
def sigma_values(sigma, n, omega_pows, out):
    """out[col, row] = k_col' * omega^row' where (col', row') = sigma(col, row)."""
    for pos in range(sigma.shape[0]):
        t = sigma[pos]
        col = t // n
        v = omega_pows[t - col * n]
        if col == 1:
            v = mulmod(v, K1)
        elif col == 2:
            v = mulmod(v, K2)
        out[pos // n, pos % n] = v


@nb.njit(**_jit)
def grand_product(a, b, c, sa, sb, sc, omega_pows, b0, b1, g0, g1, z0, z1):
    """Permutation accumulator; returns False if it fails to close or hits a zero."""
    n = a.shape[0]
    num0 = np.empty(n, dtype=np.uint64)
    num1 = np.empty(n, dtype=np.uint64)
    den0 = np.empty(n, dtype=np.uint64)
    den1 = np.empty(n, dtype=np.uint64)
    norm = np.empty(n, dtype=np.uint64)
    for i in range(n):
        x = omega_pows[i]
        p0, p1 = _factor(a[i], x, b0, b1, g0, g1)
        q0, q1 = _factor(b[i], mulmod(K1, x), b0, b1, g0, g1)
        r0, r1 = _factor(c[i], mulmod(K2, x), b0, b1, g0, g1)
        num0[i], num1[i] = _prod3(p0, p1, q0, q1, r0, r1)
        p0, p1 = _factor(a[i], sa[i], b0, b1, g0, g1)
        q0, q1 = _factor(b[i], sb[i], b0, b1, g0, g1)
        r0, r1 = _factor(c[i], sc[i], b0, b1, g0, g1)
        d0, d1 = _prod3(p0, p1, q0, q1, r0, r1)
        den0[i] = d0
        den1[i] = d1
        nv = submod(mulmod(d0, d0), mulmod(SEVEN, mulmod(d1, d1)))
        if nv == ZERO:
            return False
        norm[i] = nv
    # batch inversion of the norms
    acc = ONE
    for i in range(n):
        num_tmp = norm[i]
        norm[i] = acc
        acc = mulmod(acc, num_tmp)
    inv = invmod(acc)
    for i in range(n - 1, -1, -1):
        d0 = den0[i]
        d1 = den1[i]
        nv = submod(mulmod(d0, d0), mulmod(SEVEN, mulmod(d1, d1)))
        t = mulmod(norm[i], inv)
        inv = mulmod(inv, nv)
        norm[i] = t
    s0 = ONE
    s1 = ZERO
    for i in range(n):
        z0[i] = s0
        z1[i] = s1
        # ratio = num * conj(den) / norm(den)
        r0, r1 = ext_mul(num0[i], num1[i], den0[i], submod(ZERO, den1[i]))
        r0 = mulmod(r0, norm[i])
        r1 = mulmod(r1, norm[i])
        s0, s1 = ext_mul(s0, s1, r0, r1)
    return s0 == ONE and s1 == ZERO


@nb.njit(**_jit)
def quotient(ql, qr, qm, qo, qc, sa, sb, sc, a, b, c, pi, z0, z1,
             shift, root, inv_xm1, zh, zh_inv, n,
             beta0, beta1, gamma0, gamma1, al0, al1, alsq0, alsq1, t0, t1):
    """t = C / Z_H on the size-m coset shift * <root>, m = 4n; Z_H varies with j mod 4."""
    m = a.shape[0]
    inv_n = invmod(np.uint64(n))
    x = shift
    for j in range(m):
        av = a[j]
        bv = b[j]
        cv = c[j]
        g = addmod(mulmod(ql[j], av), mulmod(qr[j], bv))
        g = addmod(g, mulmod(qm[j], mulmod(av, bv)))
        g = addmod(g, mulmod(qo[j], cv))
        g = addmod(addmod(g, qc[j]), pi[j])
        p0, p1 = _factor(av, x, beta0, beta1, gamma0, gamma1)
        q0, q1 = _factor(bv, mulmod(K1, x), beta0, beta1, gamma0, gamma1)
        r0, r1 = _factor(cv, mulmod(K2, x), beta0, beta1, gamma0, gamma1)
        n0, n1 = _prod3(p0, p1, q0, q1, r0, r1)
        p0, p1 = _factor(av, sa[j], beta0, beta1, gamma0, gamma1)
        q0, q1 = _factor(bv, sb[j], beta0, beta1, gamma0, gamma1)
        r0, r1 = _factor(cv, sc[j], beta0, beta1, gamma0, gamma1)
        d0, d1 = _prod3(p0, p1, q0, q1, r0, r1)
        zj0 = z0[j]
        zj1 = z1[j]
        jn = j + 4
        if jn >= m:
            jn -= m
        u0, u1 = ext_mul(zj0, zj1, n0, n1)
        v0, v1 = ext_mul(z0[jn], z1[jn], d0, d1)
        pm0, pm1 = ext_mul(al0, al1, submod(u0, v0), submod(u1, v1))
        # L0(x) = (x^n - 1) / (n (x - 1))
        l0 = mulmod(mulmod(zh[j & 3], inv_n), inv_xm1[j])
        bd0, bd1 = ext_mul(alsq0, alsq1, mulmod(l0, submod(zj0, ONE)), mulmod(l0, zj1))
        s0 = addmod(addmod(g, pm0), bd0)
        s1 = addmod(pm1, bd1)
        w = zh_inv[j & 3]
        t0[j] = mulmod(s0, w)
        t1[j] = mulmod(s1, w)
        x = mulmod(x, root)


@nb.njit(**_jit)
def axpy_ext(acc0, acc1, col, l0, l1):
    """acc += lambda * col for a base-field column."""
    for i in range(col.shape[0]):
        v = col[i]
        acc0[i] = addmod(acc0[i], mulmod(v, l0))
        acc1[i] = addmod(acc1[i], mulmod(v, l1))


@nb.njit(**_jit)
def divide_linear_into(c0, c1, z0, z1, out0, out1):
    """out += (c(X) - c(z)) / (X - z) for natural-order extension coefficients."""
    n = c0.shape[0]
    q0 = ZERO
    q1 = ZERO
    for k in range(n - 1, 0, -1):
        # q_{k-1} = c_k + z * q_k
        t0, t1 = ext_mul(q0, q1, z0, z1)
        q0 = addmod(c0[k], t0)
        q1 = addmod(c1[k], t1)
        out0[k - 1] = addmod(out0[k - 1], q0)
        out1[k - 1] = addmod(out1[k - 1], q1)


@nb.njit(**_jit)
def fri_fold(f0, f1, beta0, beta1, xinv, winv, out0, out1):
    """out[j] = (f[j] + f[j+h])/2 + beta * (f[j] - f[j+h]) / (2 x_j), x_j^-1 = xinv * winv^j."""
    h = f0.shape[0] // 2
    xi = mulmod(xinv, INV2)
    for j in range(h):
        u0 = f0[j]
        u1 = f1[j]
        v0 = f0[j + h]
        v1 = f1[j + h]
        e0 = mulmod(addmod(u0, v0), INV2)
        e1 = mulmod(addmod(u1, v1), INV2)
        o0 = mulmod(submod(u0, v0), xi)
        o1 = mulmod(submod(u1, v1), xi)
        m0, m1 = ext_mul(beta0, beta1, o0, o1)
        out0[j] = addmod(e0, m0)
        out1[j] = addmod(e1, m1)
        xi = mulmod(xi, winv)


@nb.njit(**_jit)
def deep_values(vals, xs, lam, ev_z0, ev_z1, ev_w0, ev_w1, zeta0, zeta1, zw0, zw1, out):
    """DEEP quotient at opened points.

    vals: (Q, 2, 19) committed values at x and -x; xs: (Q,) the point x.
    lam: (21, 2) powers of the batching challenge; the last two weight Z0, Z1 at zeta*omega.
    Returns False if a denominator vanishes.
    """
    nq = vals.shape[0]
    nc = vals.shape[2]
    for q in range(nq):
        for side in range(2):
            x = xs[q]
            if side == 1:
                x = submod(ZERO, x)
            a0 = ZERO
            a1 = ZERO
            for k in range(nc):
                v = vals[q, side, k]
                a0 = addmod(a0, mulmod(v, lam[k, 0]))
                a1 = addmod(a1, mulmod(v, lam[k, 1]))
            # Z0 and Z1 sit at columns 11 and 12
            zv0 = vals[q, side, 11]
            zv1 = vals[q, side, 12]
            b0 = addmod(mulmod(zv0, lam[nc, 0]), mulmod(zv1, lam[nc + 1, 0]))
            b1 = addmod(mulmod(zv0, lam[nc, 1]), mulmod(zv1, lam[nc + 1, 1]))
            # 1 / (x - zeta) via the norm
            d0 = submod(x, zeta0)
            d1 = submod(ZERO, zeta1)
            nv = submod(mulmod(d0, d0), mulmod(SEVEN, mulmod(d1, d1)))
            e0 = submod(x, zw0)
            e1 = submod(ZERO, zw1)
            nw = submod(mulmod(e0, e0), mulmod(SEVEN, mulmod(e1, e1)))
            if nv == ZERO or nw == ZERO:
                return False
            iv = invmod(nv)
            iw = invmod(nw)
            r0, r1 = ext_mul(submod(a0, ev_z0), submod(a1, ev_z1), d0, submod(ZERO, d1))
            s0, s1 = ext_mul(submod(b0, ev_w0), submod(b1, ev_w1), e0, submod(ZERO, e1))
            out[q, side, 0] = addmod(mulmod(r0, iv), mulmod(s0, iw))
            out[q, side, 1] = addmod(mulmod(r1, iv), mulmod(s1, iw))
    return True


@nb.njit(**_jit)
def fri_check(pairs, nextvals, q0, log_size, shifts_inv, roots_inv, betas, final0, final1,
              shift_final, root_final):
    """Fold every query through all layers and compare against the next layer / final poly.

    pairs: (F, Q, 2, 2) values at q_i and q_i + N_i/2 of layer i.
    nextvals: (F, Q, 2) value of layer i+1 at position q_i (unused for the last layer).
    """
    nf = pairs.shape[0]
    nq = pairs.shape[1]
    for q in range(nq):
        for i in range(nf):
            half = np.int64(1) << (log_size - i - 1)
            qi = q0[q] & (half - 1)
            xi = mulmod(shifts_inv[i], powmod(roots_inv[i], np.uint64(qi)))
            xi = mulmod(xi, INV2)
            u0 = pairs[i, q, 0, 0]
            u1 = pairs[i, q, 0, 1]
            v0 = pairs[i, q, 1, 0]
            v1 = pairs[i, q, 1, 1]
            e0 = mulmod(addmod(u0, v0), INV2)
            e1 = mulmod(addmod(u1, v1), INV2)
            o0 = mulmod(submod(u0, v0), xi)
            o1 = mulmod(submod(u1, v1), xi)
            m0, m1 = ext_mul(betas[i, 0], betas[i, 1], o0, o1)
            f0 = addmod(e0, m0)
            f1 = addmod(e1, m1)
            if i + 1 < nf:
                if f0 != nextvals[i, q, 0] or f1 != nextvals[i, q, 1]:
                    return False
            else:
                x = mulmod(shift_final, powmod(root_final, np.uint64(qi)))
                r0 = ZERO
                r1 = ZERO
                for k in range(final0.shape[0] - 1, -1, -1):
                    r0 = addmod(mulmod(r0, x), final0[k])
                    r1 = addmod(mulmod(r1, x), final1[k])
                if r0 != f0 or r1 != f1:
                    return False
    return True


@nb.njit(**_jit)
def eval_final(final0, final1, xs, out):
    for q in range(xs.shape[0]):
        x = xs[q]
        r0 = ZERO
        r1 = ZERO
        for k in range(final0.shape[0] - 1, -1, -1):
            r0 = addmod(mulmod(r0, x), final0[k])
            r1 = addmod(mulmod(r1, x), final1[k])
        out[q, 0] = r0
        out[q, 1] = r1


@nb.njit(**_jit)
def points(shift, root, idx, out):
    for q in range(idx.shape[0]):
        out[q] = mulmod(shift, powmod(root, np.uint64(idx[q])))
