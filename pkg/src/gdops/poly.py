"""Polynomials: sparse homogeneous multivariate, univariate, truncated series.

The multivariate class stores terms keyed by exponent tuples (multi-indices)
and is used for the "eigenvalue-space" polynomials p(lambda); univariate
polynomials carry ascending coefficients and are used for restrictions
t -> F(tA + B).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _backend

TRIM_RTOL = 1e-12
CLUSTER_RTOL = 1e-11


class PolyError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SparseSymPoly:
    """Homogeneous polynomial ``sum_alpha a_alpha x^alpha`` in ``nvars`` variables.

    Despite the name the terms need not be permutation symmetric; see
    :func:`is_permutation_symmetric`.  Construct through :meth:`from_terms`,
    which merges duplicate multi-indices and drops zero coefficients.
    """

    nvars: int
    degree: int
    terms: tuple[tuple[tuple[int, ...], float], ...]

    @classmethod
    def from_terms(cls, nvars: int, terms: Iterable[tuple[Sequence[int], float]] | Mapping) -> "SparseSymPoly":
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[tuple[int, ...], float] = {}
        for alpha, coeff in items:
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != nvars:
                raise PolyError(f"multi-index {alpha} has length {len(alpha)}, expected {nvars}")
            if any(a < 0 for a in alpha):
                raise PolyError(f"negative exponent in {alpha}")
            merged[alpha] = merged.get(alpha, 0.0) + float(coeff)
        kept = sorted((a, c) for a, c in merged.items() if c != 0.0)
        if not kept:
            raise PolyError("zero polynomial")
        degrees = {sum(a) for a, _ in kept}
        if len(degrees) != 1:
            raise PolyError(f"polynomial is not homogeneous: total degrees {sorted(degrees)}")
        return cls(nvars, degrees.pop(), tuple(kept))

    @property
    def exponents(self) -> np.ndarray:
        return np.array([a for a, _ in self.terms], dtype=np.int64).reshape(len(self.terms), self.nvars)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for _, c in self.terms], dtype=float)

    def __call__(self, x) -> float:
        return eval_sympoly(self, x)

    def scaled(self, factor: float) -> "SparseSymPoly":
        return SparseSymPoly.from_terms(self.nvars, [(a, c * factor) for a, c in self.terms])

    def normalized(self) -> "SparseSymPoly":
        """Rescale so that p(e) = 1."""
        value = eval_sympoly(self, np.ones(self.nvars))
        if value == 0.0:
            raise PolyError("p(e) = 0, cannot normalize")
        return self.scaled(1.0 / value)

    def to_dict(self) -> dict:
        return {"nvars": self.nvars, "terms": [{"alpha": list(a), "coeff": c} for a, c in self.terms]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "SparseSymPoly":
        if not isinstance(data, Mapping):
            raise PolyError("polynomial must be a JSON object")
        unknown = set(data) - {"nvars", "terms"}
        if unknown:
            raise PolyError(f"unknown polynomial fields {sorted(unknown)}")
        try:
            nvars = int(data["nvars"])
            raw = data["terms"]
        except KeyError as exc:
            raise PolyError(f"missing field {exc.args[0]!r}") from None
        terms = []
        for i, t in enumerate(raw):
            try:
                terms.append((t["alpha"], t["coeff"]))
            except (KeyError, TypeError):
                raise PolyError(f"terms[{i}] needs 'alpha' and 'coeff'") from None
        return cls.from_terms(nvars, terms)

    def __repr__(self) -> str:
        shown = " + ".join(f"{c:g}*x^{a}" for a, c in self.terms[:4])
        more = " + ..." if len(self.terms) > 4 else ""
        return f"SparseSymPoly(n={self.nvars}, N={self.degree}: {shown}{more})"


def load_sympoly(path: str | Path) -> SparseSymPoly:
    with open(path) as fh:
        return SparseSymPoly.from_dict(json.load(fh))


def dump_sympoly(p: SparseSymPoly, path: str | Path) -> None:
    Path(path).write_text(json.dumps(p.to_dict(), indent=2))


# -- builders ---------------------------------------------------------------

def elementary_poly(n: int, k: int) -> SparseSymPoly:
    if not 1 <= k <= n:
        raise PolyError(f"need 1 <= k <= n, got k={k}, n={n}")
    terms = []
    for idx in combinations(range(n), k):
        alpha = [0] * n
        for i in idx:
            alpha[i] = 1
        terms.append((alpha, 1.0))
    return SparseSymPoly.from_terms(n, terms)


def monomial(alpha: Sequence[int], coeff: float = 1.0) -> SparseSymPoly:
    return SparseSymPoly.from_terms(len(alpha), [(alpha, coeff)])


def power_mean_poly(j: int) -> SparseSymPoly:
    """(1/j)(x_1^j + ... + x_j^j) in j variables."""
    terms = []
    for i in range(j):
        alpha = [0] * j
        alpha[i] = j
        terms.append((alpha, 1.0 / j))
    return SparseSymPoly.from_terms(j, terms)


def poly_add(p: SparseSymPoly, q: SparseSymPoly) -> SparseSymPoly:
    if p.nvars != q.nvars:
        raise PolyError("variable counts differ")
    return SparseSymPoly.from_terms(p.nvars, list(p.terms) + list(q.terms))


def poly_mul(p: SparseSymPoly, q: SparseSymPoly) -> SparseSymPoly:
    if p.nvars != q.nvars:
        raise PolyError("variable counts differ")
    terms = []
    for a, c in p.terms:
        for b, d in q.terms:
            terms.append((tuple(x + y for x, y in zip(a, b)), c * d))
    return SparseSymPoly.from_terms(p.nvars, terms)


def _embed(p: SparseSymPoly, total: int, offset: int) -> list[tuple[tuple[int, ...], float]]:
    out = []
    for a, c in p.terms:
        alpha = [0] * total
        alpha[offset:offset + p.nvars] = a
        out.append((tuple(alpha), c))
    return out


def tensor_product(q: SparseSymPoly, r: SparseSymPoly) -> SparseSymPoly:
    """q(x_1..x_n) * r(x_{n+1}..x_{n+m}) on disjoint variables."""
    total = q.nvars + r.nvars
    terms = []
    for a, c in _embed(q, total, 0):
        for b, d in _embed(r, total, q.nvars):
            terms.append((tuple(x + y for x, y in zip(a, b)), c * d))
    return SparseSymPoly.from_terms(total, terms)


def crh_constant(p: SparseSymPoly) -> float:
    """Mean of the partials at e divided by p(e)."""
    return float(np.mean(partials_at_e(p)) / eval_sympoly(p, np.ones(p.nvars)))


def convex_combination(q: SparseSymPoly, r: SparseSymPoly) -> tuple[SparseSymPoly, tuple[float, float]]:
    """Weighted sum of q and r on disjoint variables keeping the central-ray property.

    Both inputs are normalized to p(e) = 1 first.  With k, k' their central-ray
    constants the weights are k'/(k+k') for q and k/(k+k') for r.
    """
    if q.degree != r.degree:
        raise PolyError(f"convex combination needs equal degrees, got {q.degree} and {r.degree}")
    qn, rn = q.normalized(), r.normalized()
    k, kp = crh_constant(qn), crh_constant(rn)
    wq, wr = kp / (k + kp), k / (k + kp)
    total = q.nvars + r.nvars
    terms = [(a, wq * c) for a, c in _embed(qn, total, 0)] + [(a, wr * c) for a, c in _embed(rn, total, q.nvars)]
    return SparseSymPoly.from_terms(total, terms), (wq, wr)


# -- operations -------------------------------------------------------------

def eval_sympoly(p: SparseSymPoly, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (p.nvars,):
        raise PolyError(f"point has shape {x.shape}, polynomial has {p.nvars} variables")
    monos = np.prod(np.power(x[None, :], p.exponents), axis=1)
    return math.fsum(p.coefficients * monos)


def eval_sympoly_many(p: SparseSymPoly, xs) -> np.ndarray:
    """Evaluate at each row of ``xs``."""
    xs = np.asarray(xs, dtype=float)
    monos = np.prod(np.power(xs[:, None, :], p.exponents[None, :, :]), axis=2)
    return monos @ p.coefficients


def is_permutation_symmetric(p: SparseSymPoly, rtol: float = 1e-12) -> bool:
    table = dict(p.terms)
    scale = max(abs(c) for c in table.values())
    for i in range(p.nvars - 1):
        for alpha, c in table.items():
            swapped = list(alpha)
            swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
            if abs(table.get(tuple(swapped), 0.0) - c) > rtol * scale:
                return False
    return True


def partials_at_e(p: SparseSymPoly) -> np.ndarray:
    """Gradient at e = (1,...,1): component j is sum_alpha a_alpha alpha_j."""
    return p.exponents.T.astype(float) @ p.coefficients


def elementary_symmetric(values, k: int) -> float:
    values = np.ravel(np.asarray(values, dtype=float))
    if not 0 <= k <= values.size:
        raise PolyError(f"k={k} out of range for {values.size} values")
    if k == 0:
        return 1.0
    return float(_backend.elementary_all(values)[k])


# -- univariate -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class UnivariatePoly:
    """Ascending coefficients, trimmed so the leading one is significant."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        big = np.max(np.abs(c)) if c.size else 0.0
        if big == 0.0:
            object.__setattr__(self, "coeffs", np.zeros(1))
            return
        last = len(c) - 1
        while last > 0 and abs(c[last]) <= TRIM_RTOL * big:
            last -= 1
        object.__setattr__(self, "coeffs", c[: last + 1].copy())

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0.0

    def __call__(self, t):
        return np.polynomial.polynomial.polyval(t, self.coeffs)


def interpolate_univariate(nodes, values) -> UnivariatePoly:
    """Interpolating polynomial via Newton divided differences, returned in the monomial basis."""
    x = np.asarray(nodes, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise PolyError("nodes and values must be 1-d and of equal length")
    if len(np.unique(x)) != len(x):
        raise PolyError("duplicate interpolation nodes")
    n = len(x)
    dd = y.copy()
    for j in range(1, n):
        dd[j:] = (dd[j:] - dd[j - 1:-1]) / (x[j:] - x[: n - j])
    # Horner on the Newton form: p = dd0 + (t-x0)(dd1 + (t-x1)(...))
    coeffs = np.array([dd[-1]])
    for j in range(n - 2, -1, -1):
        shifted = np.concatenate(([0.0], coeffs))
        shifted[:-1] -= x[j] * coeffs
        shifted[0] += dd[j]
        coeffs = shifted
    return UnivariatePoly(coeffs)


def cluster_real_roots(z, scale: float, tol: float = CLUSTER_RTOL) -> tuple[np.ndarray, float]:
    """Turn numerical roots of a (supposedly) real-rooted polynomial into real roots.

    A root of multiplicity m perturbed by relative noise ``tol`` scatters over a
    radius of about ``tol**(1/m) * scale``, partly into the complex plane.  Roots
    are grouped by overlapping imaginary radii; a group whose spread is within
    that bound is replaced by copies of its mean.  Groups that cannot be
    explained that way keep their real parts and contribute their imaginary
    size to the returned residual.
    """
    z = np.asarray(z, dtype=complex)
    if z.size == 0:
        return np.zeros(0), 0.0
    order = np.argsort(z.real, kind="stable")
    z = z[order]
    floor = 1e-12 * scale
    radius = np.maximum(np.abs(z.imag), floor)
    groups: list[list[int]] = [[0]]
    reach = z[0].real + 2.0 * radius[0]
    for i in range(1, len(z)):
        if z[i].real - 2.0 * radius[i] <= reach:
            groups[-1].append(i)
            reach = max(reach, z[i].real + 2.0 * radius[i])
        else:
            groups.append([i])
            reach = z[i].real + 2.0 * radius[i]
    roots = []
    residual = 0.0
    for g in groups:
        zg = z[g]
        m = len(g)
        center = float(np.mean(zg.real))
        spread = float(np.max(np.abs(zg - center)))
        imag = float(np.max(np.abs(zg.imag)))
        # a split multiple root sits on a small circle; a row of distinct
        # real roots with imaginary noise does not, and is left unmerged
        dist = np.abs(zg - center)
        round_enough = m <= 2 or (imag >= 0.3 * spread and float(np.min(dist)) >= 0.2 * spread)
        if m == 1 or (spread <= 10.0 * tol ** (1.0 / m) * scale and round_enough):
            roots.extend([center] * m)
        else:
            roots.extend(zg.real.tolist())
            residual = max(residual, float(np.max(np.abs(zg.imag))))
    return np.sort(np.array(roots)), residual


def real_roots(q: UnivariatePoly, tol: float = CLUSTER_RTOL) -> tuple[np.ndarray, float]:
    """Real parts of all roots and the largest unexplained imaginary part.

    Roots come from the eigenvalues of the companion matrix (LAPACK balances
    it); near-multiple roots are consolidated by :func:`cluster_real_roots`.
    """
    if q.is_zero():
        raise PolyError("zero polynomial has no finite root set")
    if q.degree == 0:
        return np.zeros(0), 0.0
    c = q.coeffs / q.coeffs[-1]
    z = np.polynomial.polynomial.polyroots(c)
    scale = max(1.0, float(np.max(np.abs(z))))
    return cluster_real_roots(z, scale, tol)


# -- truncated series -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    order: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if len(c) != self.order + 1:
            raise PolyError(f"series of order {self.order} needs {self.order + 1} coefficients, got {len(c)}")
        object.__setattr__(self, "coeffs", c)


def series_mul(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    out = np.zeros(order + 1)
    for i in range(min(len(a), order + 1)):
        if a[i] != 0.0:
            m = min(len(b), order + 1 - i)
            out[i:i + m] += a[i] * b[:m]
    return out


def series_pow(a: np.ndarray, q: int, order: int) -> np.ndarray:
    result = np.zeros(order + 1)
    result[0] = 1.0
    base = np.asarray(a, dtype=float)[: order + 1]
    while q:
        if q & 1:
            result = series_mul(result, base, order)
        q >>= 1
        if q:
            base = series_mul(base, base, order)
    return result


def series_qth_root(s: TruncatedSeries, q: int) -> TruncatedSeries:
    """The unique series r with r(0) = 1 and r**q = s up to the truncation order."""
    if q < 1:
        raise PolyError("q must be >= 1")
    if s.coeffs[0] != 1.0:
        raise PolyError(f"constant term must be 1, got {s.coeffs[0]!r}")
    m = s.order
    r = np.zeros(m + 1)
    r[0] = 1.0
    for k in range(1, m + 1):
        # with r_k still zero, [t^k] r^q collects only the lower-order terms
        partial = series_pow(r, q, k)[k]
        r[k] = (s.coeffs[k] - partial) / q
    return TruncatedSeries(m, r)
