"""Polar-cone tests, exhaustion functions with their prelevel radius bound,
and the central ray of a Garding cone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .garding import EdgeSpanDecomposition, edge_and_span, gradient_matrix, i_eigenvalues, in_garding_cone
from .linalg import as_array, sym_basis
from .operators import OperatorSpec, directional_derivative
from .reports import CheckReport, jsonable, write_csv
from .sampling import indexed_map, random_space_spd, random_spd, random_symmetric, sample_rng

Sampler = Callable[[np.random.Generator], np.ndarray]


def inner(a, b) -> float:
    return float(np.vdot(np.asarray(a, dtype=float), np.asarray(b, dtype=float)))


def unit(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x / np.linalg.norm(x)


# -- samplers of the closed cone intersected with the unit sphere -----------

def spd_cone_sampler(d: int, boundary_fraction: float = 0.5) -> Sampler:
    """Unit positive semidefinite matrices; some samples are pushed onto the boundary."""
    def sample(rng):
        a = random_spd(rng, d, (1.0, 1.0))
        u = rng.random()
        if u < boundary_fraction:
            vals, vecs = np.linalg.eigh(a)
            keep = rng.integers(1, d) if d > 1 else 1
            vals = vals - vals[d - keep - 1] if d > 1 else vals
            vals[vals < 0] = 0.0
            a = (vecs * vals) @ vecs.T
        return unit(0.5 * (a + a.T))
    return sample


def orthant_sampler(n: int, boundary_fraction: float = 0.5) -> Sampler:
    """Unit vectors of the closed positive orthant; boundary samples zero out coordinates."""
    def sample(rng):
        x = rng.random(n)
        if rng.random() < boundary_fraction:
            zeros = rng.random(n) < 0.5
            if zeros.all():
                zeros[rng.integers(n)] = False
            x[zeros] = 0.0
        return unit(x)
    return sample


def garding_cone_sampler(f: OperatorSpec, edge: EdgeSpanDecomposition | None = None,
                         boundary_fraction: float = 0.5) -> Sampler:
    """Unit points of the closed cone inside the span.

    A Gaussian matrix X projected to the span is moved to X + (u - lambda_min(X)) Id,
    whose smallest I-eigenvalue is u >= 0.  Boundary samples take u = 0,
    the others draw u from an exponential law on the scale of X.
    """
    d = f.space.dim
    edge = edge_and_span(f) if edge is None else edge
    ident = edge.project_span(np.eye(d))

    def sample(rng):
        x = edge.project_span(random_symmetric(rng, d))
        lam_min = float(np.min(i_eigenvalues(f, x)))
        u = 0.0 if rng.random() < boundary_fraction else float(rng.exponential(np.linalg.norm(x)))
        return unit(x + (u - lam_min) * ident)
    return sample


# -- open polar criterion ---------------------------------------------------

@dataclass
class PolarTestReport:
    epsilon_hat: float
    passed: bool
    falsifier: np.ndarray | None
    samples: int
    seed: int
    margin: float

    def to_dict(self) -> dict:
        return jsonable({"pass": self.passed, "epsilon_hat": self.epsilon_hat, "falsifier": self.falsifier,
                         "samples": self.samples, "seed": self.seed, "margin": self.margin,
                         "conclusive": self.falsifier is not None})


def open_polar_test(y, sampler: Sampler, samples: int = 1000, seed: int = 42, margin: float = 0.0) -> PolarTestReport:
    """Smallest <y, x> over sampled unit x of the closed cone.

    A pass is evidence only; a falsifier with <y, x> <= 0 is conclusive.
    """
    y = np.asarray(y, dtype=float)
    xs = indexed_map(lambda i: sampler(sample_rng(seed, i)), samples)
    vals = np.array([inner(y, x) for x in xs])
    worst = int(np.argmin(vals))
    eps = float(vals[worst])
    falsifier = xs[worst] if eps <= 0.0 else None
    return PolarTestReport(eps, bool(eps > margin), falsifier, samples, seed, margin)


# -- exhaustion function ----------------------------------------------------

def exhaustion_value(g: OperatorSpec, y, x) -> float:
    """<y, x> - log g(x)."""
    x = as_array(x)
    gx = g._evaluate(x)
    if not gx > 0:
        raise ValueError(f"g(x) = {gx:.3e} is not positive; x is outside the cone")
    return inner(y, x) - math.log(gx)


def exhaustion_convexity_check(g: OperatorSpec, y, samples: int = 500, seed: int = 42, slack: float = 1e-9) -> CheckReport:
    """Midpoint convexity of the exhaustion function along seeded positive segments."""
    space = g.space

    def one(i):
        rng = sample_rng(seed, i)
        a = random_space_spd(rng, space.algebra, space.n, (0.2, 5.0))
        b = random_space_spd(rng, space.algebra, space.n, (0.2, 5.0))
        mid = exhaustion_value(g, y, 0.5 * (a + b))
        return 0.5 * (exhaustion_value(g, y, a) + exhaustion_value(g, y, b)) - mid, a - b

    results = indexed_map(one, samples)
    gaps = np.array([r[0] for r in results])
    worst = int(np.argmin(gaps))
    ok = gaps[worst] >= -slack
    return CheckReport("exhaustion_convexity", bool(ok), samples, seed, float(gaps[worst]),
                       None if ok else results[worst][1])


def prelevel_radius_bound(c: float, epsilon: float, degree: int, sup_g: float) -> float:
    """(N+1)! e^c / eps^(N+1) * sup g."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return math.factorial(degree + 1) * math.exp(c) / epsilon ** (degree + 1) * sup_g


def _largest_radius(c: float, slope: float, big_n: int, log_g: float) -> float | None:
    """Largest r with r*slope - N log r - log_g <= c, or None if the ray misses the prelevel set."""
    def psi(r):
        return r * slope - big_n * math.log(r) - log_g

    r_min = big_n / slope
    if psi(r_min) > c:
        return None
    lo, hi = r_min, 2.0 * r_min
    while psi(hi) <= c:
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if psi(mid) <= c:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * hi:
            break
    return lo


def prelevel_harness(g: OperatorSpec, y, c: float, samples: int = 10000, seed: int = 42,
                     sampler: Sampler | None = None, safety: float = 1.1) -> CheckReport:
    """Every sampled x of the closed cone with psi(x) <= c has |x| <= R.

    Each sample fixes a unit direction; along that ray the largest radius of
    the prelevel set is found by bisection, which is the worst point on it.
    epsilon and sup g are estimated from the same samples; sup g is inflated
    by ``safety``.
    """
    y = np.asarray(y, dtype=float)
    sampler = sampler or garding_cone_sampler(g, boundary_fraction=0.3)
    big_n = g.degree
    xs = indexed_map(lambda i: sampler(sample_rng(seed, i)), samples)
    slopes = np.array([inner(y, x) for x in xs])
    gvals = np.array([g._evaluate(x) for x in xs])
    eps = float(np.min(slopes))
    sup_g = safety * float(np.max(gvals))
    radius = prelevel_radius_bound(c, eps, big_n, sup_g)
    worst_r, witness, hits = 0.0, None, 0
    for x, slope, gv in zip(xs, slopes, gvals):
        if gv <= 0:
            continue
        r = _largest_radius(c, slope, big_n, math.log(gv))
        if r is None:
            continue
        hits += 1
        if r > worst_r:
            worst_r, witness = r, x * r
    ok = worst_r <= radius
    return CheckReport("prelevel_radius", bool(ok), samples, seed, radius - worst_r, None if ok else witness,
                       details={"R": radius, "epsilon": eps, "sup_g": sup_g, "safety": safety,
                                "max_radius_found": worst_r, "rays_meeting_prelevel": hits, "c": c})


# -- central ray ------------------------------------------------------------

@dataclass
class CentralRayReport:
    gradient_at_I: np.ndarray
    k_hat: float
    deviation: float
    k_theory: float
    laplacian_deviation: float
    inequality_gap: float
    passed: bool
    ray_point: np.ndarray | None = None

    def to_dict(self) -> dict:
        return jsonable({"pass": self.passed, "k_hat": self.k_hat, "k_theory": self.k_theory,
                         "deviation": self.deviation, "laplacian_deviation": self.laplacian_deviation,
                         "inequality_min_gap": self.inequality_gap, "gradient_at_I": self.gradient_at_I,
                         "ray_point": self.ray_point})


def central_ray_check(f: OperatorSpec, tol: float = 1e-8, samples: int = 50, seed: int = 42) -> CentralRayReport:
    """Fit the log-gradient at Id to k Id and compare k with N / dim."""
    d = f.space.dim
    ident = np.eye(d)
    fi = f._evaluate(ident)
    if not fi > 0:
        raise ValueError("F(Id) must be positive")
    grad = gradient_matrix(f, ident) / fi
    k_hat = float(np.trace(grad)) / d
    deviation = float(np.linalg.norm(grad - k_hat * ident))
    k_theory = f.degree / d
    # trace of the Garding eigenvalues on basis directions vs k * trace
    lap = 0.0
    for e in sym_basis(d):
        tr_f = float(np.sum(i_eigenvalues(f, e)))
        lap = max(lap, abs(tr_f - k_hat * float(np.trace(e))))
    # F(A)^(1/N) <= F(I)^(1/N) (k/N) <A, I> on positive samples
    big_n = f.degree
    gaps = []
    for i in range(samples):
        a = random_space_spd(sample_rng(seed, i), f.space.algebra, f.space.n)
        gaps.append(fi ** (1.0 / big_n) * k_hat / big_n * float(np.trace(a)) - f._evaluate(a) ** (1.0 / big_n))
    gap = float(min(gaps)) if gaps else math.inf
    ok = deviation <= tol * max(1.0, abs(k_hat)) and abs(k_hat - k_theory) <= tol
    return CentralRayReport(grad, k_hat, deviation, k_theory, lap, gap, bool(ok))


class SearchError(RuntimeError):
    pass


@dataclass
class CentralRaySearchResult:
    ray_point: np.ndarray
    value: float
    residual: float
    iterations: int
    converged_restarts: int
    restarts: int
    trace: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return jsonable({"ray_point": self.ray_point, "value": self.value, "residual": self.residual,
                         "iterations": self.iterations, "converged_restarts": self.converged_restarts,
                         "restarts": self.restarts})


def _root_value(f: OperatorSpec, x: np.ndarray) -> float:
    v = f._evaluate(x)
    return v ** (1.0 / f.degree) if v > 0 else -math.inf


def _coords_gradient(f: OperatorSpec, x: np.ndarray, basis: Sequence[np.ndarray]) -> np.ndarray:
    return np.array([directional_derivative(f, x, e, 1) for e in basis])


def central_ray_search(f: OperatorSpec, seed: int = 42, iters: int = 200, restarts: int = 50,
                       basis: Sequence[np.ndarray] | None = None, tol: float = 1e-10,
                       trace_csv=None) -> CentralRaySearchResult:
    """Maximize F(B)^(1/N) over unit B in the cone by Riemannian gradient ascent.

    ``basis`` is an orthonormal list of symmetric matrices spanning the search
    subspace (all symmetric matrices by default).  Steps use backtracking
    from 0.1 and are rejected when they leave the cone.  The returned residual
    is |grad F - <grad F, B> B| / |grad F| at the best point.
    """
    d = f.space.dim
    basis = list(sym_basis(d) if basis is None else [as_array(b) for b in basis])
    mats = np.array(basis)

    def to_matrix(c):
        return np.tensordot(c, mats, axes=1)

    best = None
    trace_rows = []
    converged = 0
    total_iters = 0
    for r in range(restarts):
        rng = sample_rng(seed, r)
        start = random_space_spd(rng, f.space.algebra, f.space.n)
        c = np.array([inner(start, e) for e in basis])
        if np.linalg.norm(c) == 0 or _root_value(f, to_matrix(c)) == -math.inf:
            c = np.array([inner(np.eye(d), e) for e in basis]) + 0.1 * rng.standard_normal(len(basis))
        c = unit(c)
        val = _root_value(f, to_matrix(c))
        if val == -math.inf:
            continue
        step = 0.1
        residual = math.inf
        for it in range(iters):
            x = to_matrix(c)
            grad = _coords_gradient(f, x, basis)
            radial = float(grad @ c)
            tangent = grad - radial * c
            gnorm = float(np.linalg.norm(grad))
            residual = float(np.linalg.norm(tangent)) / gnorm if gnorm > 0 else math.inf
            if trace_csv is not None:
                trace_rows.append((r, it, val, residual))
            total_iters += 1
            if residual <= tol:
                break
            # ascend log F (same maximizer as F^(1/N)) under an Armijo test
            direction = tangent / val ** f.degree
            slope = float(direction @ direction)
            accepted = False
            while step > 1e-14:
                trial = unit(c + step * direction)
                tval = _root_value(f, to_matrix(trial))
                if tval > 0 and f.degree * math.log(tval / val) >= 1e-4 * step * slope \
                        and in_garding_cone(f, to_matrix(trial)):
                    c, val = trial, tval
                    accepted = True
                    step = min(2.0 * step, 1.0)
                    break
                step *= 0.5
            if not accepted:
                break
        if residual <= max(tol, 1e-6):
            converged += 1
        if best is None or val > best[1]:
            best = (c.copy(), val, residual)
    if trace_csv is not None:
        write_csv(trace_csv, ["restart", "iteration", "value", "residual"], trace_rows)
    if best is None or converged == 0:
        raise SearchError("no restart converged")
    return CentralRaySearchResult(to_matrix(best[0]), best[1], best[2], total_iters, converged, restarts, trace_rows)


def angle_between(a, b) -> float:
    a = unit(as_array(a).ravel())
    b = unit(as_array(b).ravel())
    return float(np.arccos(np.clip(abs(a @ b), -1.0, 1.0)))


def diagonal_basis(d: int) -> list[np.ndarray]:
    """The diagonal matrices E_11, ..., E_dd as a search subspace."""
    out = []
    for i in range(d):
        e = np.zeros((d, d))
        e[i, i] = 1.0
        out.append(e)
    return out


__all__ = [
    "CentralRayReport",
    "CentralRaySearchResult",
    "PolarTestReport",
    "SearchError",
    "angle_between",
    "central_ray_check",
    "central_ray_search",
    "diagonal_basis",
    "exhaustion_convexity_check",
    "exhaustion_value",
    "garding_cone_sampler",
    "open_polar_test",
    "orthant_sampler",
    "prelevel_harness",
    "prelevel_radius_bound",
    "spd_cone_sampler",
]
