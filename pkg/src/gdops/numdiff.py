"""Finite-difference derivatives of scalar functions of one real variable.

Used as independent oracles for the analytic barrier-derivative formulas.
Weights come from Fornberg's recursion, which handles any node set.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np


def fornberg_weights(x0: float, nodes, order: int) -> np.ndarray:
    """Weights w with sum w_i f(nodes_i) ~ f^(order)(x0)."""
    z = np.asarray(nodes, dtype=float)
    n = len(z)
    if order >= n:
        raise ValueError(f"need more than {order} nodes for derivative order {order}")
    c = np.zeros((n, order + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = z[0] - x0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = z[i] - x0
        for j in range(i):
            c3 = z[i] - z[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def central_difference(f: Callable[[float], float], order: int, h: float, half_width: int | None = None) -> float:
    """Centered stencil derivative of ``f`` at 0 with 2*half_width+1 points of spacing h."""
    m = half_width if half_width is not None else max(1, (order + 1) // 2)
    nodes = h * np.arange(-m, m + 1)
    w = fornberg_weights(0.0, nodes, order)
    vals = np.array([f(float(t)) for t in nodes])
    return float(w @ vals)


def adaptive_derivative(f: Callable[[float], float], order: int, radius: float, half_width: int = 5,
                        rtol: float = 1e-9, max_halvings: int = 12) -> tuple[float, float]:
    """Derivative of order ``order`` at 0 for f analytic on |t| < radius.

    A wide centered stencil is started with its outermost node at radius/2 and
    the spacing is halved until two successive estimates agree to ``rtol`` or
    stop improving.  Returns (estimate, last change).  The outermost node never
    leaves the disc, so f is only sampled where it is defined.
    """
    h = 0.5 * radius / half_width
    prev = central_difference(f, order, h, half_width)
    best, best_change = prev, math.inf
    for _ in range(max_halvings):
        h *= 0.5
        cur = central_difference(f, order, h, half_width)
        change = abs(cur - prev)
        if change < best_change:
            best, best_change = cur, change
        elif change > 4.0 * best_change:
            break
        if change <= rtol * max(abs(cur), 1e-300):
            return cur, change
        prev = cur
    return best, best_change
