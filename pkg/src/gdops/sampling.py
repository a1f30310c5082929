"""Seeded sampling and the deterministic parallel map used by every harness.

Sample ``i`` of a run with seed ``s`` always draws from ``default_rng([s, i])``,
so a report depends only on (seed, samples) and not on scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

from .linalg import Algebra, project, structures

T = TypeVar("T")

SPD_SHIFT = 1e-3


def sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(index)])


def thread_count() -> int:
    raw = os.environ.get("GD_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def indexed_map(fn: Callable[[int], T], count: int) -> list[T]:
    """[fn(0), ..., fn(count-1)], evaluated on up to GD_THREADS threads."""
    workers = min(thread_count(), count)
    if workers <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


def random_symmetric(rng: np.random.Generator, d: int) -> np.ndarray:
    m = rng.standard_normal((d, d))
    return 0.5 * (m + m.T)


def random_spd(rng: np.random.Generator, d: int, scale_range: Sequence[float] = (0.1, 10.0)) -> np.ndarray:
    """M^t M + 1e-3 Id, rescaled so its largest eigenvalue is log-uniform in scale_range."""
    m = rng.standard_normal((d, d))
    a = m.T @ m + SPD_SHIFT * np.eye(d)
    lo, hi = scale_range
    target = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
    return a * (target / float(np.linalg.norm(a, 2)))


def random_orthogonal(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def random_spd_conditioned(rng: np.random.Generator, d: int, cond: float = 20.0) -> np.ndarray:
    """Q diag(mu) Q^t with mu log-uniform in [1/sqrt(cond), sqrt(cond)].

    Base points for Garding spectra: root finding degrades with the condition
    number of the base point, so it is bounded here.
    """
    half = 0.5 * np.log(cond)
    mu = np.exp(rng.uniform(-half, half, d))
    q = random_orthogonal(rng, d)
    a = (q * mu) @ q.T
    return 0.5 * (a + a.T)


def random_space_spd(rng: np.random.Generator, algebra: Algebra, n: int,
                     scale_range: Sequence[float] = (0.1, 10.0)) -> np.ndarray:
    """Positive definite sample commuting with the structures of the algebra."""
    algebra = Algebra.parse(algebra)
    a = random_spd(rng, n * algebra.factor, scale_range)
    return project(a, algebra) if algebra is not Algebra.REAL else a


def random_lagrangian_positive(rng: np.random.Generator, n: int,
                               scale_range: Sequence[float] = (0.1, 10.0), max_ratio: float = 0.999) -> np.ndarray:
    """t Id + S with S anticommuting with J and t > largest eigenvalue of S."""
    jm = structures(Algebra.COMPLEX, n).J
    x = random_symmetric(rng, 2 * n)
    skew = 0.5 * (x + jm @ x @ jm)
    top = float(np.max(np.abs(np.linalg.eigvalsh(skew))))
    lo, hi = scale_range
    t = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
    # the margin spans nearly-singular to comfortably interior samples
    ratio = rng.uniform(0.0, max_ratio)
    if top > 0:
        skew = skew * (ratio * t / top)
    return t * np.eye(2 * n) + skew
