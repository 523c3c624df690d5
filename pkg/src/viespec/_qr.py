"""Compiled kernels for the dense eigensolver.

Householder reduction to upper Hessenberg form, single-shift complex QR on
the active window (eigenvalues only), and inverse iteration on a Hessenberg
matrix for eigenvectors / residuals.
"""
import numba
import numpy as np

_EPS = 2.220446049250313e-16


@numba.njit(cache=True)
def hessenberg(a):
    h = a.copy()
    n = h.shape[0]
    v = np.zeros(n, np.complex128)
    w = np.zeros(n, np.complex128)
    for k in range(n - 2):
        alpha = 0.0
        for i in range(k + 1, n):
            alpha += h[i, k].real ** 2 + h[i, k].imag ** 2
        alpha = np.sqrt(alpha)
        if alpha == 0.0:
            continue
        x0 = h[k + 1, k]
        ph = x0 / abs(x0) if x0 != 0 else 1.0 + 0.0j
        for i in range(k + 1, n):
            v[i] = h[i, k]
        v[k + 1] += ph * alpha
        vn = 0.0
        for i in range(k + 1, n):
            vn += v[i].real ** 2 + v[i].imag ** 2
        vn = np.sqrt(vn)
        for i in range(k + 1, n):
            v[i] /= vn
        for j in range(k, n):
            w[j] = 0.0
        for i in range(k + 1, n):
            cv = np.conj(v[i])
            for j in range(k, n):
                w[j] += cv * h[i, j]
        for i in range(k + 1, n):
            t = 2.0 * v[i]
            for j in range(k, n):
                h[i, j] -= t * w[j]
        for i in range(n):
            s = 0.0j
            for j in range(k + 1, n):
                s += h[i, j] * v[j]
            s *= 2.0
            for j in range(k + 1, n):
                h[i, j] -= s * np.conj(v[j])
        for i in range(k + 2, n):
            h[i, k] = 0.0
    return h


@numba.njit(cache=True)
def _wilkinson(a, b, c, d):
    half = 0.5 * (a - d)
    disc = np.sqrt(half * half + b * c)
    m1 = 0.5 * (a + d) + disc
    m2 = 0.5 * (a + d) - disc
    return m1 if abs(m1 - d) < abs(m2 - d) else m2


@numba.njit(cache=True)
def shifted_qr(h, exceptional_every, max_iter):
    """Eigenvalues of upper Hessenberg ``h`` (overwritten).

    Returns ``(eigenvalues, status, iterations)``; ``status`` is -1 on
    success, otherwise the index of the last unconverged row (entries above
    it in ``eigenvalues`` are valid).
    """
    n = h.shape[0]
    ev = np.zeros(n, np.complex128)
    hi = n - 1
    its = 0
    total = 0
    while hi >= 0:
        lo = hi
        while lo > 0:
            s = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if s == 0.0:
                s = 1.0
            if abs(h[lo, lo - 1]) <= _EPS * s:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            ev[hi] = h[hi, hi]
            hi -= 1
            its = 0
            continue
        if its >= max_iter:
            return ev, hi, total
        its += 1
        total += 1
        if its % exceptional_every == 0:
            mu = h[hi, hi] + 0.75 * abs(h[hi, hi - 1])
        else:
            mu = _wilkinson(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])
        x = h[lo, lo] - mu
        y = h[lo + 1, lo]
        for k in range(lo, hi):
            if k > lo:
                x = h[k, k - 1]
                y = h[k + 1, k - 1]
            ax = abs(x)
            r = np.sqrt(ax * ax + abs(y) ** 2)
            if r == 0.0:
                continue
            if ax == 0.0:
                cs = 0.0
                sn = np.conj(y) / abs(y)
            else:
                cs = ax / r
                sn = (x / ax) * np.conj(y) / r
            for j in range(max(lo, k - 1), hi + 1):
                t1 = h[k, j]
                t2 = h[k + 1, j]
                h[k, j] = cs * t1 + sn * t2
                h[k + 1, j] = -np.conj(sn) * t1 + cs * t2
            for i in range(lo, min(k + 2, hi) + 1):
                t1 = h[i, k]
                t2 = h[i, k + 1]
                h[i, k] = cs * t1 + np.conj(sn) * t2
                h[i, k + 1] = -sn * t1 + cs * t2
    return ev, -1, total


@numba.njit(cache=True)
def _hess_solve(h, lam, b, tiny):
    n = h.shape[0]
    m = h.copy()
    for i in range(n):
        m[i, i] -= lam
    x = b.copy()
    for k in range(n - 1):
        if abs(m[k + 1, k]) > abs(m[k, k]):
            for j in range(k, n):
                t = m[k, j]
                m[k, j] = m[k + 1, j]
                m[k + 1, j] = t
            t = x[k]
            x[k] = x[k + 1]
            x[k + 1] = t
        if m[k, k] == 0:
            m[k, k] = tiny
        f = m[k + 1, k] / m[k, k]
        if f != 0:
            for j in range(k, n):
                m[k + 1, j] -= f * m[k, j]
            x[k + 1] -= f * x[k]
    if m[n - 1, n - 1] == 0:
        m[n - 1, n - 1] = tiny
    for i in range(n - 1, -1, -1):
        s = x[i]
        for j in range(i + 1, n):
            s -= m[i, j] * x[j]
        x[i] = s / m[i, i]
    return x


@numba.njit(cache=True)
def inverse_iteration(h, eigs, steps):
    """Unit eigenvector estimates (columns) and residuals ``|H v - lam v|``."""
    n = h.shape[0]
    hnorm = 0.0
    for i in range(n):
        for j in range(n):
            hnorm = max(hnorm, abs(h[i, j]))
    tiny = max(hnorm, 1.0) * _EPS
    vecs = np.zeros((n, eigs.shape[0]), np.complex128)
    res = np.zeros(eigs.shape[0])
    for e in range(eigs.shape[0]):
        lam = eigs[e]
        x = np.ones(n, np.complex128)
        for i in range(n):
            x[i] += 0.01 * (i % 7) + 0.003j * (i % 5)
        for _ in range(steps):
            x = _hess_solve(h, lam, x, tiny)
            nrm = np.sqrt(np.sum(np.abs(x) ** 2))
            if nrm == 0 or not np.isfinite(nrm):
                break
            x = x / nrm
        r = 0.0
        for i in range(n):
            s = -lam * x[i]
            for j in range(max(0, i - 1), n):
                s += h[i, j] * x[j]
            r += abs(s) ** 2
        vecs[:, e] = x
        res[e] = np.sqrt(r)
    return vecs, res
