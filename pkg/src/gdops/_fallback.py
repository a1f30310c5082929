"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``.

Same signatures, same algorithms, plain Python floats.  Used when the
extension is not built or when ``GDOPS_PURE=1`` is set.
"""

from __future__ import annotations

import math

import numpy as np


def _rotate(a, v, n, p, q):
    apq = a[p][q]
    theta = (a[q][q] - a[p][p]) / (2.0 * apq)
    if abs(theta) > 1e150:
        t = 0.5 / theta
    else:
        t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
        if theta < 0.0:
            t = -t
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c
    tau = s / (1.0 + c)
    a[p][p] -= t * apq
    a[q][q] += t * apq
    a[p][q] = 0.0
    a[q][p] = 0.0
    ap, aq = a[p], a[q]
    for r in range(n):
        if r != p and r != q:
            ar = a[r]
            g = ar[p]
            h = ar[q]
            ar[p] = ap[r] = g - s * (h + g * tau)
            ar[q] = aq[r] = h + s * (g - h * tau)
    if v is not None:
        for r in range(n):
            vr = v[r]
            g = vr[p]
            h = vr[q]
            vr[p] = g - s * (h + g * tau)
            vr[q] = h + s * (g - h * tau)


def _offdiag_sq(a, n):
    return sum(a[i][j] * a[i][j] for i in range(n) for j in range(i + 1, n))


def jacobi_eigh(a_in, tol, max_sweeps, vectors):
    a = [[float(x) for x in row] for row in np.asarray(a_in, dtype=float)]
    n = len(a)
    v = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)] if vectors else None
    tol2 = tol * tol
    sweep = 0
    converged = False
    polished = False
    while sweep < max_sweeps:
        off = _offdiag_sq(a, n)
        if off <= tol2:
            if polished or off == 0.0:
                converged = True
                break
            polished = True
        sweep += 1
        thresh = 0.2 * math.sqrt(off) / (n * n) if sweep < 4 else 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if apq == 0.0:
                    continue
                if sweep > 4 and abs(apq) < 1e-18 * (abs(a[p][p]) + abs(a[q][q])):
                    a[p][q] = a[q][p] = 0.0
                    continue
                if abs(apq) <= thresh:
                    continue
                _rotate(a, v, n, p, q)
    if not converged:
        converged = _offdiag_sq(a, n) <= tol2
    diag = np.array([a[i][i] for i in range(n)], dtype=float)
    resid = max((abs(a[i][j]) for i in range(n) for j in range(i + 1, n)), default=0.0)
    return diag, (np.array(v, dtype=float) if vectors else None), resid, sweep, converged


def elementary_all(values):
    x = [float(t) for t in np.ravel(values)]
    e = [1.0] + [0.0] * len(x)
    for i, xi in enumerate(x):
        for k in range(i + 1, 0, -1):
            e[k] += xi * e[k - 1]
    return np.array(e, dtype=float)


def pfold_product(values, p):
    x = [float(t) for t in np.ravel(values)]
    n = len(x)
    if p < 1 or p > n:
        raise ValueError("p must satisfy 1 <= p <= n")
    idx = list(range(p))
    prod = 1.0
    while True:
        s = 0.0
        for j in idx:
            s += x[j]
        prod *= s
        i = p - 1
        while i >= 0 and idx[i] == i + n - p:
            i -= 1
        if i < 0:
            return prod
        idx[i] += 1
        for j in range(i + 1, p):
            idx[j] = idx[j - 1] + 1


def signed_sum_product(mu, lams):
    x = [float(t) for t in np.ravel(lams)]
    n = len(x)
    prod = 1.0
    for mask in range(1 << n):
        s = float(mu)
        for j in range(n):
            if (mask >> j) & 1:
                s -= x[j]
            else:
                s += x[j]
        prod *= s
    return prod
