# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops.

Every function here has a pure-Python twin in :mod:`gdops._fallback` with the
same signature and the same floating-point algorithm; :mod:`gdops._backend`
picks one at import time.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()


cdef double _offdiag_sq(double[:, ::1] a, Py_ssize_t n) nogil:
    cdef double s = 0.0
    cdef Py_ssize_t i, j
    for i in range(n):
        for j in range(i + 1, n):
            s += a[i, j] * a[i, j]
    return s


cdef double _offdiag_max(double[:, ::1] a, Py_ssize_t n) nogil:
    cdef double m = 0.0
    cdef Py_ssize_t i, j
    for i in range(n):
        for j in range(i + 1, n):
            if fabs(a[i, j]) > m:
                m = fabs(a[i, j])
    return m


cdef void _rotate(double[:, ::1] a, double[:, ::1] v, bint vectors,
                  Py_ssize_t n, Py_ssize_t p, Py_ssize_t q) nogil:
    cdef double apq = a[p, q]
    cdef double theta, t, c, s, tau, g, h
    cdef Py_ssize_t r
    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
    if fabs(theta) > 1e150:
        t = 0.5 / theta
    else:
        t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
        if theta < 0.0:
            t = -t
    c = 1.0 / sqrt(t * t + 1.0)
    s = t * c
    tau = s / (1.0 + c)
    a[p, p] -= t * apq
    a[q, q] += t * apq
    a[p, q] = 0.0
    a[q, p] = 0.0
    for r in range(n):
        if r != p and r != q:
            g = a[r, p]
            h = a[r, q]
            a[r, p] = g - s * (h + g * tau)
            a[p, r] = a[r, p]
            a[r, q] = h + s * (g - h * tau)
            a[q, r] = a[r, q]
    if vectors:
        for r in range(n):
            g = v[r, p]
            h = v[r, q]
            v[r, p] = g - s * (h + g * tau)
            v[r, q] = h + s * (g - h * tau)


def jacobi_eigh(a_in, double tol, int max_sweeps, bint vectors):
    """Cyclic threshold Jacobi on a copy of ``a_in``.

    Returns ``(diag, V, residual, sweeps, converged)``; ``diag`` is unsorted.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] work = np.array(a_in, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] a = work
    cdef Py_ssize_t n = a.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] vmat = np.eye(n if vectors else 1, dtype=np.float64)
    cdef double[:, ::1] v = vmat
    cdef int sweep = 0
    cdef bint converged = False
    cdef bint polished = False
    cdef Py_ssize_t p, q
    cdef double thresh, off, tol2 = tol * tol
    with nogil:
        while sweep < max_sweeps:
            off = _offdiag_sq(a, n)
            if off <= tol2:
                if polished or off == 0.0:
                    converged = True
                    break
                polished = True
            sweep += 1
            # threshold only for the first three sweeps
            thresh = 0.2 * sqrt(off) / (n * n) if sweep < 4 else 0.0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    if a[p, q] == 0.0:
                        continue
                    if sweep > 4 and fabs(a[p, q]) < 1e-18 * (fabs(a[p, p]) + fabs(a[q, q])):
                        a[p, q] = 0.0
                        a[q, p] = 0.0
                        continue
                    if fabs(a[p, q]) <= thresh:
                        continue
                    _rotate(a, v, vectors, n, p, q)
        if not converged:
            off = _offdiag_sq(a, n)
            converged = off <= tol2
    diag = np.array([work[i, i] for i in range(n)], dtype=np.float64)
    return diag, (vmat if vectors else None), _offdiag_max(a, n), sweep, converged


def elementary_all(values):
    """All elementary symmetric functions e_0..e_n of ``values``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], i, k
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n + 1, dtype=np.float64)
    cdef double[::1] e = out
    cdef double[::1] xv = x
    e[0] = 1.0
    with nogil:
        for i in range(n):
            k = i + 1
            while k >= 1:
                e[k] += xv[i] * e[k - 1]
                k -= 1
    return out


def pfold_product(values, int p):
    """Product over all p-subsets J of the partial sums of ``values`` over J."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(values, dtype=np.float64)
    cdef double[::1] xv = x
    cdef Py_ssize_t n = x.shape[0]
    if p < 1 or p > n:
        raise ValueError("p must satisfy 1 <= p <= n")
    cdef cnp.ndarray[cnp.intp_t, ndim=1] idx_arr = np.arange(p, dtype=np.intp)
    cdef Py_ssize_t[::1] idx = idx_arr
    cdef double prod = 1.0, s
    cdef Py_ssize_t i, j
    with nogil:
        while True:
            s = 0.0
            for j in range(p):
                s += xv[idx[j]]
            prod *= s
            i = p - 1
            while i >= 0 and idx[i] == i + n - p:
                i -= 1
            if i < 0:
                break
            idx[i] += 1
            for j in range(i + 1, p):
                idx[j] = idx[j - 1] + 1
    return prod


def signed_sum_product(double mu, lams):
    """Product over all sign vectors s of (mu + sum_j s_j lams_j)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(lams, dtype=np.float64)
    cdef double[::1] xv = x
    cdef Py_ssize_t n = x.shape[0], j
    cdef unsigned long mask, total = 1UL << n
    cdef double prod = 1.0, s
    with nogil:
        for mask in range(total):
            s = mu
            for j in range(n):
                if (mask >> j) & 1UL:
                    s -= xv[j]
                else:
                    s += xv[j]
            prod *= s
    return prod
