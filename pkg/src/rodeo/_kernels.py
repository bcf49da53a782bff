"""Compiled inner loops: the Jacobi eigensolver and the batched trajectory step.

Each trajectory (and each matrix) is processed independently in its own loop
iteration, so outputs never depend on batch composition.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# step status codes
OK = 0
NEGATIVE_RATE = 1
TOO_LARGE = 2
NO_CONVERGENCE = 3

MODE_ZERO = 0
MODE_SCALED = 1
MODE_BASIS = 2


@njit(cache=True, inline="always")
def _abs2(z):
    return z.real * z.real + z.imag * z.imag


@njit(cache=True, inline="always")
def _vec_less(vals, vecs, i, j):
    # ascending eigenvalue, then lexicographic (re, im) over components
    if vals[i] != vals[j]:
        return vals[i] < vals[j]
    for k in range(vecs.shape[1]):
        a = vecs[i, k]
        b = vecs[j, k]
        if a.real != b.real:
            return a.real < b.real
        if a.imag != b.imag:
            return a.imag < b.imag
    return False


@njit(cache=True, inline="always")
def _finish(vals, vecs, out_vals, out_vecs, order):
    """Phase-fix rows of ``vecs`` and write them sorted into the outputs."""
    d = vals.shape[0]
    for i in range(d):
        big = 0.0
        for k in range(d):
            m = _abs2(vecs[i, k])
            if m > big:
                big = m
        lead = 0
        for k in range(d):
            if _abs2(vecs[i, k]) >= big * (1.0 - 2e-12):
                lead = k
                break
        piv = vecs[i, lead]
        mag = np.sqrt(_abs2(piv))
        if mag > 0.0:
            ph = np.conj(piv) / mag
            for k in range(d):
                vecs[i, k] = vecs[i, k] * ph
            vecs[i, lead] = vecs[i, lead].real + 0j
    for i in range(d):
        order[i] = i
    for i in range(1, d):
        cur = order[i]
        j = i - 1
        while j >= 0 and _vec_less(vals, vecs, cur, order[j]):
            order[j + 1] = order[j]
            j -= 1
        order[j + 1] = cur
    for i in range(d):
        out_vals[i] = vals[order[i]]
        for k in range(d):
            out_vecs[i, k] = vecs[order[i], k]


@njit(cache=True, inline="always")
def jacobi_one(a_in, rel, sweeps, out_vals, out_vecs, a, v, vals, vecs, order):
    """Cyclic complex Jacobi on one Hermitian matrix. Returns False if not converged.

    ``a, v, vals, vecs, order`` are scratch buffers (see :func:`workspace`).
    """
    d = a_in.shape[0]
    fro = 0.0
    for i in range(d):
        for j in range(d):
            a[i, j] = 0.5 * (a_in[i, j] + np.conj(a_in[j, i]))
            fro += _abs2(a[i, j])
    thresh = rel * np.sqrt(fro)
    for i in range(d):
        for j in range(d):
            v[i, j] = 0.0
        v[i, i] = 1.0
        a[i, i] = a[i, i].real + 0j

    converged = False
    for _ in range(sweeps):
        rotated = False
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                mag = np.sqrt(_abs2(apq))
                if mag <= thresh:
                    continue
                rotated = True
                phase = apq / mag
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                sgn = 1.0 if tau >= 0 else -1.0
                t = sgn / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # G = diag(1, e^{-i phi}) @ [[c, s], [-s, c]] on (p, q)
                g_pp = c + 0j
                g_pq = s + 0j
                g_qp = -s * np.conj(phase)
                g_qq = c * np.conj(phase)
                for k in range(d):
                    ap = a[k, p]
                    aq = a[k, q]
                    a[k, p] = ap * g_pp + aq * g_qp
                    a[k, q] = ap * g_pq + aq * g_qq
                for k in range(d):
                    ap = a[p, k]
                    aq = a[q, k]
                    a[p, k] = np.conj(g_pp) * ap + np.conj(g_qp) * aq
                    a[q, k] = np.conj(g_pq) * ap + np.conj(g_qq) * aq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real + 0j
                a[q, q] = a[q, q].real + 0j
                for k in range(d):
                    vp = v[k, p]
                    vq = v[k, q]
                    v[k, p] = vp * g_pp + vq * g_qp
                    v[k, q] = vp * g_pq + vq * g_qq
        if not rotated:
            converged = True
            break

    for i in range(d):
        vals[i] = a[i, i].real
        for k in range(d):
            vecs[i, k] = v[k, i]
    _finish(vals, vecs, out_vals, out_vecs, order)
    return converged


@njit(cache=True)
def workspace(d):
    return (
        np.empty((d, d), dtype=np.complex128),
        np.empty((d, d), dtype=np.complex128),
        np.empty(d),
        np.empty((d, d), dtype=np.complex128),
        np.empty(d, dtype=np.int64),
    )


@njit(cache=True)
def eig_batch(a, rel, sweeps):
    n = a.shape[0]
    d = a.shape[1]
    vals = np.empty((n, d))
    vecs = np.empty((n, d, d), dtype=np.complex128)
    ok = np.empty(n, dtype=np.bool_)
    w0, w1, w2, w3, w4 = workspace(d)
    for b in range(n):
        ok[b] = jacobi_one(a[b], rel, sweeps, vals[b], vecs[b], w0, w1, w2, w3, w4)
    return vals, vecs, ok


@njit(cache=True, inline="always")
def basis_spectrum(r, basis, out_vals, out_vecs, vals, vecs, order):
    """Spectrum of an operator known to be diagonal in ``basis`` (rows)."""
    d = r.shape[0]
    for i in range(d):
        acc = 0j
        for x in range(d):
            for y in range(d):
                acc += np.conj(basis[i, x]) * r[x, y] * basis[i, y]
        vals[i] = acc.real
        for k in range(d):
            vecs[i, k] = basis[i, k]
    _finish(vals, vecs, out_vals, out_vecs, order)


@njit(cache=True)
def step_batch(
    psi, k0, ops, rates, dt, u, mode, c, basis,
    rel, sweeps, self_tol, rate_tol, max_p,
    new_psi, jump_idx, jump_rate,
):
    """Advance every row of ``psi`` by one step of the jump process.

    Returns (status, row, index, value) describing the first failure, with
    negative rates reported in preference to oversized steps.
    """
    n, d = psi.shape
    n_ops = ops.shape[0]
    neg_row = -1
    neg_idx = -1
    neg_val = 0.0
    big_row = -1
    big_val = 0.0
    conv_row = -1
    jump = np.empty((d, d), dtype=np.complex128)
    r = np.empty((d, d), dtype=np.complex128)
    lpsi = np.empty(d, dtype=np.complex128)
    phi = np.empty(d, dtype=np.complex128)
    vals = np.empty(d)
    vecs = np.empty((d, d), dtype=np.complex128)
    lam = np.empty(d)
    w0, w1, w2, w3, w4 = workspace(d)

    for b in range(n):
        x = psi[b]
        for i in range(d):
            for j in range(d):
                jump[i, j] = 0.0
        for a in range(n_ops):
            for i in range(d):
                acc = 0j
                for k in range(d):
                    acc += ops[a, i, k] * x[k]
                lpsi[i] = acc
            for i in range(d):
                for j in range(d):
                    jump[i, j] += rates[a] * (lpsi[i] * np.conj(lpsi[j]))

        if mode == MODE_ZERO:
            for i in range(d):
                phi[i] = 0.0
        elif mode == MODE_SCALED:
            for i in range(d):
                phi[i] = c * x[i]
        else:
            ca = 0j
            cb = 0j
            for k in range(d):
                ca += np.conj(basis[0, k]) * x[k]
                cb += np.conj(basis[1, k]) * x[k]
            jj = 0j
            for i in range(d):
                for k in range(d):
                    jj += np.conj(basis[0, i]) * jump[i, k] * basis[1, k]
            for i in range(d):
                phi[i] = (-2.0 * jj * cb) * basis[0, i] + (-2.0 * np.conj(jj) * ca) * basis[1, i]

        for i in range(d):
            for j in range(d):
                r[i, j] = jump[i, j] + 0.5 * (x[i] * np.conj(phi[j]) + phi[i] * np.conj(x[j]))

        if mode == MODE_BASIS:
            basis_spectrum(r, basis, vals, vecs, w2, w3, w4)
        else:
            if not jacobi_one(r, rel, sweeps, vals, vecs, w0, w1, w2, w3, w4):
                if conv_row < 0:
                    conv_row = b
                continue

        scale = 1.0
        for i in range(d):
            ov = 0j
            for k in range(d):
                ov += np.conj(vecs[i, k]) * x[k]
            if _abs2(ov) > 1.0 - self_tol:
                lam[i] = 0.0
            else:
                lam[i] = vals[i]
            if abs(lam[i]) > scale:
                scale = abs(lam[i])
        total = 0.0
        hit = d
        for i in range(d):
            if lam[i] < -rate_tol * scale:
                if neg_row < 0:
                    neg_row = b
                    neg_idx = i
                    neg_val = lam[i]
            li = lam[i] if lam[i] > 0.0 else 0.0
            lam[i] = li
            total += li * dt
            if hit == d and total > u[b]:
                hit = i
        if total > max_p and big_row < 0:
            big_row = b
            big_val = total

        if hit < d:
            for k in range(d):
                new_psi[b, k] = vecs[hit, k]
            jump_idx[b] = hit
            jump_rate[b] = lam[hit]
        else:
            nrm2 = 0.0
            for k in range(d):
                nrm2 += x[k].real ** 2 + x[k].imag ** 2
            acc2 = 0.0
            for i in range(d):
                kp = 0j
                for k in range(d):
                    kp += k0[i, k] * x[k]
                kp -= 0.5j * phi[i] * nrm2
                y = x[i] - 1j * dt * kp
                new_psi[b, i] = y
                acc2 += y.real ** 2 + y.imag ** 2
            s = np.sqrt(acc2)
            for i in range(d):
                new_psi[b, i] = new_psi[b, i] / s
            jump_idx[b] = -1
            jump_rate[b] = 0.0

    if neg_row >= 0:
        return NEGATIVE_RATE, neg_row, neg_idx, neg_val
    if big_row >= 0:
        return TOO_LARGE, big_row, -1, big_val
    if conv_row >= 0:
        return NO_CONVERGENCE, conv_row, -1, 0.0
    return OK, -1, -1, 0.0


@njit(cache=True)
def basis_spectrum_batch(r, basis):
    n = r.shape[0]
    d = r.shape[1]
    vals = np.empty((n, d))
    vecs = np.empty((n, d, d), dtype=np.complex128)
    w0, w1, w2, w3, w4 = workspace(d)
    for b in range(n):
        basis_spectrum(r[b], basis, vals[b], vecs[b], w2, w3, w4)
    return vals, vecs
