"""Garding eigenvalues, cone membership, edge/span, and barrier derivatives.

For a hyperbolic F of degree N and a base point A with F(A) != 0 the
polynomial s -> F(sA + B) factors as F(A) * prod_j (s + lambda_j).  The
lambda_j are recovered by Chebyshev interpolation of that restriction on an
interval fitted to the roots, followed by a colleague-matrix root solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as cheb

from .linalg import as_array, eigenvalues_sym, project, scale_of, sym_basis
from .numdiff import adaptive_derivative
from .operators import OperatorSpec, _is_identity, directional_derivative, restriction_values, taylor_coefficients
from .poly import CLUSTER_RTOL, cluster_real_roots, elementary_symmetric
from .reports import CheckReport
from .sampling import (
    indexed_map,
    random_lagrangian_positive,
    random_space_spd,
    random_spd_conditioned,
    random_symmetric,
    sample_rng,
)

HYPERBOLICITY_RTOL = 1e-8
FACTORIZATION_RTOL = 1e-7
ZERO_RTOL = 1e-10
MAX_INTERVAL_ITERS = 12


class GardingError(ValueError):
    pass


class ConeViolation(GardingError):
    pass


@dataclass(frozen=True, eq=False)
class GardingSpectrum:
    values: np.ndarray
    hyperbolicity_residual: float
    degree_drop: int
    factorization_residual: float
    base_value: float
    interval: tuple[float, float] = (0.0, 1.0)

    def to_dict(self) -> dict:
        return {
            "values": self.values.tolist(),
            "hyperbolicity_residual": self.hyperbolicity_residual,
            "degree_drop": self.degree_drop,
            "factorization_residual": self.factorization_residual,
            "base_value": self.base_value,
        }


def _space_default(f: OperatorSpec, a):
    if a is None:
        return None
    a = as_array(a)
    return None if _is_identity(a) else a


def garding_spectrum(f: OperatorSpec, a, b) -> GardingSpectrum:
    """Garding eigenvalues of B with respect to A (A=None means the identity)."""
    a = _space_default(f, a)
    b = as_array(b)
    d = f.space.dim
    if b.shape != (d, d):
        raise GardingError(f"matrix of size {b.shape[0]} does not belong to a space of dimension {d}")
    n_deg = f.degree
    base = f._evaluate(np.eye(d) if a is None else a)
    if a is None:
        if not base > 0.0:
            raise GardingError(f"F(Id) = {base:.3e} is not positive")
    else:
        ref = abs(f._evaluate(np.eye(d))) * (scale_of(a) / math.sqrt(d)) ** n_deg
        if abs(base) <= 1e-12 * ref:
            raise GardingError(f"base point on zero set (F(A) = {base:.3e})")
    nb = float(np.linalg.norm(b))
    if n_deg == 0 or nb == 0.0:
        return GardingSpectrum(np.zeros(n_deg), 0.0, n_deg, 0.0, base)

    def restricted(s):
        return restriction_values(f, a, b, s)

    if a is None:
        radius = nb
    else:
        radius = nb / max(float(np.min(np.abs(np.linalg.eigvalsh(a)))), 1e-3 * scale_of(a))
    center = 0.0
    x_nodes = cheb.chebpts1(n_deg + 1)
    for _ in range(MAX_INTERVAL_ITERS):
        vals = restricted(center + radius * x_nodes)
        coef = cheb.chebfit(x_nodes, vals, n_deg)
        zx = cheb.chebroots(coef) if n_deg > 1 else np.array([-coef[0] / coef[1]], dtype=complex)
        zs = center + radius * zx
        lo, hi = float(np.min(zs.real)), float(np.max(zs.real))
        new_center = 0.5 * (lo + hi)
        spread = float(np.max(np.abs(zs - new_center)))
        new_radius = max(1.5 * spread, 0.05 * max(abs(new_center), spread), 1e-12 * nb)
        inside = float(np.max(np.abs(zs - center))) <= radius
        if inside and radius <= 1.25 * new_radius:
            break
        center, radius = new_center, new_radius
    roots_x, resid_x = cluster_real_roots(zx, 1.0, CLUSTER_RTOL)
    roots = center + radius * roots_x

    mids = 0.5 * (x_nodes[:-1] + x_nodes[1:])
    s_all = center + radius * np.concatenate([x_nodes, mids])
    v_all = np.concatenate([vals, restricted(center + radius * mids)])
    v_scale = max(float(np.max(np.abs(v_all))), 1e-300)

    def mismatch(r):
        prod = base * np.prod(s_all[:, None] - r[None, :], axis=1)
        return float(np.max(np.abs(prod - v_all)) / v_scale)

    fac = mismatch(roots)
    resid = radius * resid_x
    if n_deg > 1:
        # crowded roots: restart from the raw roots, complex pairs split apart
        start = np.sort(zs.real + np.sign(zs.imag) * np.abs(zs.imag))
        polished = _merge_real_clusters(_weierstrass_polish(restricted, base, start, radius), radius)
        polished = _refine_clusters(restricted, base, polished, radius)
        fac_polished = mismatch(polished)
        if fac_polished <= fac:
            roots, fac = polished, fac_polished
            if fac <= 1e-3 * FACTORIZATION_RTOL:
                resid = 0.0
    lam = np.sort(-roots)
    lam_scale = max(1.0, float(np.max(np.abs(lam))))
    small = np.abs(lam) <= ZERO_RTOL * lam_scale
    lam[small] = 0.0
    return GardingSpectrum(lam, resid, int(np.count_nonzero(small)), fac, base, (center - radius, center + radius))


def _weierstrass_polish(restricted, base: float, start: np.ndarray, scale: float, iters: int = 100) -> np.ndarray:
    """Refine real roots by Weierstrass corrections computed from direct evaluations.

    Global interpolation loses accuracy when many roots crowd an interval;
    evaluating F at the root estimates themselves does not.
    """
    r = np.array(start, dtype=float)
    for _ in range(iters):
        diff = r[:, None] - r[None, :]
        np.fill_diagonal(diff, 1.0)
        denom = base * np.prod(diff, axis=1)
        if not np.all(np.isfinite(denom)) or np.any(denom == 0.0):
            return np.array(start, dtype=float)
        step = restricted(r) / denom
        r = r - step
        if not np.all(np.isfinite(r)):
            return np.array(start, dtype=float)
        if float(np.max(np.abs(step))) <= 1e-15 * scale:
            break
    return np.sort(r)


def _merge_real_clusters(r: np.ndarray, scale: float, noise: float = 1e-15) -> np.ndarray:
    """Average runs of real roots that are as close as an m-fold root split by ``noise``."""
    r = np.sort(r)
    out = r.copy()
    i = 0
    while i < len(r):
        j = i + 1
        while j < len(r) and r[j] - r[i] <= 10.0 * noise ** (1.0 / (j - i + 1)) * scale:
            j += 1
        if j - i > 1:
            out[i:j] = np.mean(r[i:j])
        i = j
    return out


def _refine_clusters(restricted, base: float, r: np.ndarray, scale: float, sweeps: int = 2) -> np.ndarray:
    """Re-locate each m-fold root c from two direct evaluations at c -/+ h.

    After dividing out the other roots the restriction behaves like
    (s - c)^m, so |q(c-h)|^(1/m) and |q(c+h)|^(1/m) are the distances from
    the two probes to the root.
    """
    r = np.sort(np.asarray(r, dtype=float))
    centers, counts = np.unique(r, return_counts=True)
    if np.all(counts == 1):
        return r
    centers = centers.astype(float)
    for _ in range(sweeps):
        for idx in np.flatnonzero(counts > 1):
            m = int(counts[idx])
            c = centers[idx]
            mask = np.arange(len(centers)) != idx
            others = np.repeat(centers[mask], counts[mask])
            gap = float(np.min(np.abs(centers[mask] - c))) if np.any(mask) else scale
            h = 0.25 * gap
            if h <= 0.0:
                continue
            probes = np.array([c - h, c + h])
            q = restricted(probes) / (base * np.prod(probes[:, None] - others[None, :], axis=1))
            dist = np.abs(q) ** (1.0 / m)
            if not np.all(np.isfinite(dist)) or dist.sum() == 0.0:
                continue
            centers[idx] = probes[0] + 2.0 * h * dist[0] / dist.sum()
    return np.sort(np.repeat(centers, counts))


def i_eigenvalues(f: OperatorSpec, a) -> np.ndarray:
    return garding_spectrum(f, None, a).values


def cone_tolerance(a) -> float:
    return 1e-9 * (1.0 + float(np.linalg.norm(as_array(a))))


def in_garding_cone(f: OperatorSpec, a, tol: float | None = None) -> bool:
    """True iff every I-eigenvalue of A exceeds tol (default 1e-9 (1 + ||A||_F))."""
    tol = cone_tolerance(a) if tol is None else tol
    return bool(np.min(i_eigenvalues(f, a)) > tol)


def _require_cone(f: OperatorSpec, a) -> None:
    a = as_array(a)
    if _is_identity(a):
        return
    if not in_garding_cone(f, a):
        raise ConeViolation("base point is not in the Garding cone")


def is_hyperbolic(f: OperatorSpec, sample_count: int = 200, seed: int = 42, tol: float = HYPERBOLICITY_RTOL) -> CheckReport:
    """Random-direction test that s -> F(s Id + B) has only real roots."""
    d = f.space.dim

    def one(i):
        b = random_symmetric(sample_rng(seed, i), d)
        spec = garding_spectrum(f, None, b)
        root_scale = max(1.0, float(np.max(np.abs(spec.values))))
        return spec.hyperbolicity_residual / root_scale, spec.factorization_residual, b

    results = indexed_map(one, sample_count)
    ratios = np.array([r[0] for r in results])
    worst = int(np.argmax(ratios))
    return CheckReport(
        "hyperbolicity",
        bool(ratios[worst] <= tol),
        sample_count,
        seed,
        worst_gap=float(tol - ratios[worst]),
        witness=results[worst][2] if ratios[worst] > tol else None,
        residuals={"max_imag_relative": float(ratios[worst]),
                   "max_factorization": float(max(r[1] for r in results))},
    )


# -- edge and span -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EdgeSpanDecomposition:
    edge_basis: list
    span_basis: list
    nullspace_tolerance: float
    gram_eigenvalues: np.ndarray = field(repr=False, default=None)

    @property
    def edge_dim(self) -> int:
        return len(self.edge_basis)

    def project_span(self, x) -> np.ndarray:
        x = as_array(x)
        out = x.copy()
        for e in self.edge_basis:
            out -= float(np.vdot(e, x)) * e
        return out


def eigenvalue_square_sum(f: OperatorSpec, b) -> float:
    """Q(B) = sum_j lambda_j(B)^2 from the two lowest Taylor coefficients of F(Id + tB)."""
    b = as_array(b)
    c = taylor_coefficients(f, np.eye(f.space.dim), b)
    e1 = c[1] / c[0]
    e2 = c[2] / c[0] if len(c) > 2 else 0.0
    return float(e1 * e1 - 2.0 * e2)


def edge_and_span(f: OperatorSpec, tol: float = 1e-8) -> EdgeSpanDecomposition:
    basis = sym_basis(f.space.dim)
    m = len(basis)
    q_diag = [eigenvalue_square_sum(f, e) for e in basis]
    gram = np.zeros((m, m))
    for i in range(m):
        gram[i, i] = q_diag[i]
        for j in range(i + 1, m):
            gram[i, j] = gram[j, i] = 0.5 * (eigenvalue_square_sum(f, basis[i] + basis[j]) - q_diag[i] - q_diag[j])
    spec = eigenvalues_sym(gram, vectors=True)
    thresh = tol * max(1.0, float(np.max(np.abs(spec.values))))
    d = f.space.dim
    edge, span = [], []
    for val, vec in zip(spec.values, spec.vectors.T):
        mat = sum(c * e for c, e in zip(vec, basis))
        (edge if val <= thresh else span).append(np.asarray(mat).reshape(d, d))
    return EdgeSpanDecomposition(edge, span, thresh, spec.values)


# -- barrier derivatives ---------------------------------------------------

def log_derivative(f: OperatorSpec, a, b, k: int) -> float:
    """k-th derivative of t -> log F(A + tB) at 0 from the A-eigenvalues of B."""
    if k < 1:
        raise ValueError("k must be >= 1")
    _require_cone(f, a)
    lam = garding_spectrum(f, a, b).values
    return (-1) ** (k - 1) * math.factorial(k - 1) * float(np.sum(lam ** k))


def log_derivative_fd(f: OperatorSpec, a, b, k: int) -> tuple[float, float]:
    """Finite-difference oracle for :func:`log_derivative`; returns (value, reference size)."""
    a = as_array(a)
    b = as_array(b)
    lam = garding_spectrum(f, a, b).values
    top = float(np.max(np.abs(lam)))
    ref = math.factorial(k - 1) * float(np.sum(np.abs(lam) ** k))
    if top == 0.0:
        return 0.0, 0.0
    radius = 1.0 / top

    def g(t):
        return math.log(f._evaluate(a + t * b))

    val, _ = adaptive_derivative(g, k, radius)
    return val, ref


def gradient_matrix(f: OperatorSpec, a) -> np.ndarray:
    """The symmetric matrix G with <G, B> = d/dt F(A + tB) at 0."""
    a = as_array(a)
    d = f.space.dim
    out = np.zeros((d, d))
    for e in sym_basis(d):
        out += directional_derivative(f, a, e, 1) * e
    return out


def guler_check(f: OperatorSpec, a, b, k: int, l: int, slack: float = 1e-9) -> CheckReport:
    """|sum lambda^k|^(1/k) <= (sum lambda^l)^(1/l) for even l <= k.

    Both sides are the normalized derivatives of log F, taken in absolute
    value; for even l the l-th derivative is -(l-1)! sum lambda^l.
    """
    if l % 2 or l < 2 or l > k:
        raise ValueError("need l even with 2 <= l <= k")
    _require_cone(f, a)
    lam = garding_spectrum(f, a, b).values
    lhs = abs(float(np.sum(lam ** k))) ** (1.0 / k)
    rhs = float(np.sum(lam ** l)) ** (1.0 / l)
    scale = max(1.0, float(np.max(np.abs(lam))) if lam.size else 1.0)
    nonzero = int(np.count_nonzero(np.abs(lam) > 1e-9 * scale))
    gap = rhs - lhs
    ok = gap >= -slack * scale
    equality_expected = nonzero <= 1
    if equality_expected:
        ok = ok and abs(gap) <= slack * scale
    return CheckReport(
        "guler",
        bool(ok),
        1,
        worst_gap=gap,
        witness=None if ok else as_array(b),
        details={"k": k, "l": l, "lhs": lhs, "rhs": rhs, "nonzero_eigenvalues": nonzero,
                 "equality_expected": equality_expected},
    )


def discriminant(lam) -> float:
    lam = np.asarray(lam, dtype=float)
    diff = lam[:, None] - lam[None, :]
    return float(np.sum(np.triu(diff, 1) ** 2))


def discriminant_identity_check(f: OperatorSpec, a, b, rtol: float = 1e-4) -> CheckReport:
    """Second derivatives of F and F^(1/N) along B against their eigenvalue formulas."""
    a = as_array(a)
    b = as_array(b)
    _require_cone(f, a)
    lam = garding_spectrum(f, a, b).values
    n_deg = f.degree
    fa = f._evaluate(a)
    root = fa ** (1.0 / n_deg)
    pred_f = 2.0 * fa * elementary_symmetric(lam, 2) if n_deg >= 2 else 0.0
    pred_root = -root * discriminant(lam) / n_deg ** 2
    top = float(np.max(np.abs(lam)))
    sq = float(np.sum(lam ** 2))
    if top == 0.0:
        fd_f = fd_root = 0.0
    else:
        radius = 1.0 / top
        fd_f, _ = adaptive_derivative(lambda t: f._evaluate(a + t * b), 2, radius)
        fd_root, _ = adaptive_derivative(lambda t: f._evaluate(a + t * b) ** (1.0 / n_deg), 2, radius)
    ref_f = max(abs(pred_f), fa * sq, 1e-300)
    ref_root = max(abs(pred_root), root * sq / n_deg, 1e-300)
    err_f = abs(fd_f - pred_f) / ref_f
    err_root = abs(fd_root - pred_root) / ref_root
    ok = err_f <= rtol and err_root <= rtol
    log_hess = -sq
    return CheckReport(
        "discriminant_identity",
        bool(ok),
        1,
        worst_gap=rtol - max(err_f, err_root),
        witness=None if ok else b,
        residuals={"second_derivative_F": err_f, "second_derivative_root": err_root},
        details={"predicted_F": pred_f, "fd_F": fd_f, "predicted_root": pred_root, "fd_root": fd_root,
                 "discriminant": discriminant(lam), "log_hessian": log_hess},
    )


def _log_derivative_from(lam: np.ndarray, k: int) -> float:
    return (-1) ** (k - 1) * math.factorial(k - 1) * float(np.sum(lam ** k))


def base_point(f: OperatorSpec, rng: np.random.Generator) -> np.ndarray:
    """A well-conditioned point of the cone: positive definite, or t Id + skew for the Lagrangian operator."""
    space = f.space
    if f.kind == "lagrangian_ma":
        return random_lagrangian_positive(rng, space.n, (0.5, 2.0), max_ratio=0.8)
    a = random_spd_conditioned(rng, space.dim)
    return project(a, space.algebra) if space.algebra.factor > 1 else a


def barrier_harness(f: OperatorSpec, samples: int = 100, seed: int = 42, orders=(1, 2, 3, 4),
                    rtol: float = 1e-4) -> CheckReport:
    """log_derivative vs finite differences, Guler and discriminant checks on seeded (A, B)."""
    def one(i):
        rng = sample_rng(seed, i)
        a = base_point(f, rng)
        b = random_symmetric(rng, f.space.dim)
        lam = garding_spectrum(f, a, b).values
        top = float(np.max(np.abs(lam)))
        errs = []
        for k in orders:
            exact = _log_derivative_from(lam, k)
            fd, _ = adaptive_derivative(lambda t: math.log(f._evaluate(a + t * b)), k, 1.0 / top)
            ref = math.factorial(k - 1) * float(np.sum(np.abs(lam) ** k))
            errs.append(abs(exact - fd) / max(ref, 1e-300))
        guler = [guler_check(f, a, b, k, l) for k, l in ((3, 2), (4, 2), (4, 4))]
        disc = discriminant_identity_check(f, a, b, rtol)
        return errs, guler, disc, b

    results = indexed_map(one, samples)
    log_err = np.array([r[0] for r in results])
    guler_gap = np.array([min(g.worst_gap for g in r[1]) for r in results])
    disc_err = np.array([max(r[2].residuals.values()) for r in results])
    guler_ok = all(g.passed for r in results for g in r[1])
    worst_log = int(np.argmax(np.max(log_err, axis=1)))
    ok = bool(np.max(log_err) <= rtol and guler_ok and np.max(disc_err) <= rtol)
    return CheckReport(
        "barrier",
        ok,
        samples,
        seed,
        worst_gap=float(rtol - np.max(log_err)),
        witness=None if ok else results[worst_log][3],
        residuals={
            "log_derivative_rel_err": {str(k): float(np.max(log_err[:, j])) for j, k in enumerate(orders)},
            "guler_min_gap": float(np.min(guler_gap)),
            "discriminant_rel_err": float(np.max(disc_err)),
        },
    )


def monotonicity_check(f: OperatorSpec, samples: int = 100, seed: int = 42) -> CheckReport:
    """F(A + P) > F(A) for A in the cone and P positive definite."""
    space = f.space

    def one(i):
        rng = sample_rng(seed, i)
        a = random_space_spd(rng, space.algebra, space.n)
        p = random_space_spd(rng, space.algebra, space.n)
        fa = f._evaluate(a)
        return (f._evaluate(a + p) - fa) / max(abs(fa), 1e-300), p

    results = indexed_map(one, samples)
    gaps = np.array([r[0] for r in results])
    worst = int(np.argmin(gaps))
    return CheckReport("monotonicity", bool(gaps[worst] > 0), samples, seed, float(gaps[worst]),
                       None if gaps[worst] > 0 else results[worst][1])


def factorization_residual(f: OperatorSpec, a, b) -> float:
    return garding_spectrum(f, a, b).factorization_residual


__all__ = [
    "ConeViolation",
    "EdgeSpanDecomposition",
    "GardingError",
    "GardingSpectrum",
    "barrier_harness",
    "discriminant",
    "discriminant_identity_check",
    "edge_and_span",
    "garding_spectrum",
    "gradient_matrix",
    "guler_check",
    "i_eigenvalues",
    "in_garding_cone",
    "is_hyperbolic",
    "log_derivative",
    "log_derivative_fd",
    "monotonicity_check",
]
