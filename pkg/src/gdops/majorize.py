"""Determinant majorization: the polynomial-level lemma, operator harnesses,
concavity and superadditivity checks, and the failing diagonal family with
its Pogorelov-type subsolutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .linalg import Algebra, NotPositiveDefinite, as_array, cholesky, det_field, eigenvalues_sym, lu_det
from .operators import (
    ConvexCombo,
    Det,
    DiagonalPoly,
    LagrangianMA,
    OperatorSpec,
    OrderedEigPoly,
    PFoldSum,
    Sigma,
    SymPolyOfEigs,
    TensorProduct,
    diagonal_family,
    diagonal_counterexample,
)
from .poly import (
    PolyError,
    SparseSymPoly,
    convex_combination,
    elementary_poly,
    eval_sympoly,
    partials_at_e,
    poly_mul,
    tensor_product,
)
from .reports import CheckReport, jsonable, write_csv
from .sampling import indexed_map, random_lagrangian_positive, random_space_spd, sample_rng

CRH_RTOL = 1e-12


# -- polynomial level -------------------------------------------------------

@dataclass
class BasicLemmaReport:
    coefficients_nonneg: bool
    violating_alpha: tuple | None
    normalization: float
    central_ray: np.ndarray
    central_ray_equal: bool
    k: float
    euler_k: float
    nvars: int
    degree: int

    @property
    def passed(self) -> bool:
        return self.coefficients_nonneg and self.normalization > 0 and self.central_ray_equal

    def to_dict(self) -> dict:
        return jsonable({
            "pass": self.passed,
            "coefficients_nonneg": self.coefficients_nonneg,
            "violating_alpha": self.violating_alpha,
            "normalization": self.normalization,
            "central_ray": self.central_ray,
            "central_ray_equal": self.central_ray_equal,
            "k": self.k,
            "euler_k": self.euler_k,
        })


def check_basic_lemma(p: SparseSymPoly) -> BasicLemmaReport:
    """Nonnegative coefficients and a gradient at e along e, read off the coefficients.

    k is reported for the normalized polynomial p / p(e).
    """
    bad = next((alpha for alpha, c in p.terms if c < 0), None)
    pe = math.fsum(p.coefficients)
    ray = partials_at_e(p)
    spread = float(np.max(ray) - np.min(ray)) if ray.size else 0.0
    equal = spread <= CRH_RTOL * max(1.0, float(np.max(np.abs(ray))))
    k = float(np.mean(ray)) / pe if pe != 0 else math.nan
    return BasicLemmaReport(bad is None, bad, pe, ray, bool(equal), k, p.degree / p.nvars, p.nvars, p.degree)


def _linear_sum(indices: Sequence[int], n: int) -> SparseSymPoly:
    terms = []
    for j in indices:
        alpha = [0] * n
        alpha[j] = 1
        terms.append((alpha, 1.0))
    return SparseSymPoly.from_terms(n, terms)


def operator_polynomial(f: OperatorSpec) -> SparseSymPoly | None:
    """The polynomial p with F(A) = p(eigenvalues or diagonal), when F has one."""
    n = f.space.n
    if isinstance(f, Sigma):
        return elementary_poly(n, f.k)
    if isinstance(f, Det):
        return elementary_poly(n, n)
    if isinstance(f, PFoldSum):
        from itertools import combinations

        out = None
        for subset in combinations(range(n), f.p):
            lin = _linear_sum(subset, n)
            out = lin if out is None else poly_mul(out, lin)
        return out
    if isinstance(f, (SymPolyOfEigs, DiagonalPoly, OrderedEigPoly)):
        return f.poly
    if isinstance(f, (ConvexCombo, TensorProduct)):
        return f.combined
    return None


def basic_lemma_sample_check(p: SparseSymPoly, samples: int = 1000, seed: int = 42, slack: float = 1e-10) -> CheckReport:
    """p(x)^(1/N) >= p(e)^(1/N) (x_1...x_n)^(1/n) on seeded x in (0, 10]^n."""
    n, big_n = p.nvars, p.degree
    pe = math.fsum(p.coefficients)
    rng = np.random.default_rng([int(seed), 0])
    xs = 10.0 * (1.0 - rng.random((samples, n)))
    gaps = np.empty(samples)
    for i, x in enumerate(xs):
        lhs = eval_sympoly(p, x) ** (1.0 / big_n)
        rhs = pe ** (1.0 / big_n) * math.exp(float(np.mean(np.log(x))))
        gaps[i] = lhs - rhs
    worst = int(np.argmin(gaps))
    ok = gaps[worst] >= -slack
    return CheckReport("basic_lemma_samples", bool(ok), samples, seed, float(gaps[worst]), None if ok else xs[worst])


def random_crh_polynomial(rng: np.random.Generator, n: int, degree: int, terms: int = 6) -> SparseSymPoly:
    """Random nonnegative polynomial made symmetric by averaging over all variable permutations."""
    from itertools import permutations

    base = []
    for _ in range(terms):
        cuts = np.sort(rng.integers(0, degree + 1, n - 1))
        alpha = np.diff(np.concatenate([[0], cuts, [degree]]))
        base.append((tuple(int(a) for a in alpha), float(rng.random() + 0.1)))
    merged: dict = {}
    perms = list(permutations(range(n)))
    for alpha, c in base:
        for perm in perms:
            key = tuple(alpha[perm[j]] for j in range(n))
            merged[key] = merged.get(key, 0.0) + c / len(perms)
    return SparseSymPoly.from_terms(n, list(merged.items())).normalized()


# -- operator level ---------------------------------------------------------

@dataclass
class MajorizationReport:
    gamma: float
    samples: int
    min_gap: float
    witness: np.ndarray | None
    seed: int
    passed: bool
    exponent_n: int
    gaps: np.ndarray = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return jsonable({
            "pass": self.passed,
            "gamma": self.gamma,
            "samples": self.samples,
            "seed": self.seed,
            "min_gap": self.min_gap,
            "witness": self.witness,
            "det_root": self.exponent_n,
        })


def determinant_term(f: OperatorSpec, a) -> tuple[float, int]:
    """(det A, m) with det A^(1/m) the majorant: the field determinant and field n.

    The Lagrangian operator is compared with the real determinant of its
    2n x 2n argument, with m = 2n.
    """
    a = as_array(a)
    space = f.space
    if isinstance(f, LagrangianMA):
        return float(np.prod(eigenvalues_sym(a).values)), space.dim
    if space.algebra is Algebra.REAL:
        return float(np.prod(eigenvalues_sym(a).values)), space.n
    return det_field(a, space.algebra), space.n


def majorization_gap(f: OperatorSpec, a, gamma: float | None = None) -> float:
    a = as_array(a)
    big_n = f.degree
    if gamma is None:
        gamma = default_gamma(f)
    d, m = determinant_term(f, a)
    return f._evaluate(a) ** (1.0 / big_n) - gamma * max(d, 0.0) ** (1.0 / m)


def default_gamma(f: OperatorSpec) -> float:
    """F(I)^(1/N); 1 for the Lagrangian operator, whose stated bound carries no constant."""
    if isinstance(f, LagrangianMA):
        return 1.0
    return f._evaluate(np.eye(f.space.dim)) ** (1.0 / f.degree)


def positive_sample(f: OperatorSpec, rng: np.random.Generator, scale_range=(0.1, 10.0)) -> np.ndarray:
    if isinstance(f, LagrangianMA):
        return random_lagrangian_positive(rng, f.space.n, scale_range)
    return random_space_spd(rng, f.space.algebra, f.space.n, scale_range)


def majorization_harness(f: OperatorSpec, samples: int = 1000, seed: int = 42, scale_range=(0.1, 10.0),
                         gamma: float | None = None, csv_path=None, slack: float = 1e-9) -> MajorizationReport:
    gamma = default_gamma(f) if gamma is None else gamma

    def one(i):
        a = positive_sample(f, sample_rng(seed, i), scale_range)
        return majorization_gap(f, a, gamma), a

    results = indexed_map(one, samples)
    gaps = np.array([r[0] for r in results])
    worst = int(np.argmin(gaps))
    scale = max(1.0, scale_range[1])
    ok = bool(gaps[worst] >= -slack * scale)
    if csv_path is not None:
        write_csv(csv_path, ["sample_index", "gap"], enumerate(gaps))
    _, m = determinant_term(f, np.eye(f.space.dim))
    return MajorizationReport(gamma, samples, float(gaps[worst]), results[worst][1], seed, ok, m, gaps)


def _pairs(f: OperatorSpec, samples: int, seed: int):
    def one(i):
        rng = sample_rng(seed, i)
        return positive_sample(f, rng), positive_sample(f, rng)

    return indexed_map(one, samples)


def superadditivity_pair(f: OperatorSpec, a, p) -> tuple[float, float]:
    """Slacks of F(A+P)^(1/N) >= F(A)^(1/N) + F(P)^(1/N) and of the normalized det form."""
    a = as_array(a)
    p = as_array(p)
    big_n = f.degree
    fi = f._evaluate(np.eye(f.space.dim)) ** (1.0 / big_n)
    fap = f._evaluate(a + p) ** (1.0 / big_n)
    fa = f._evaluate(a) ** (1.0 / big_n)
    fp = f._evaluate(p) ** (1.0 / big_n)
    d, m = determinant_term(f, p)
    return fap - fa - fp, (fap - fa) / fi - max(d, 0.0) ** (1.0 / m)


def superadditivity_check(f: OperatorSpec, samples: int = 200, seed: int = 42, slack: float = 1e-9) -> CheckReport:
    pairs = _pairs(f, samples, seed)
    vals = np.array([superadditivity_pair(f, a, p) for a, p in pairs])
    worst = int(np.argmin(np.min(vals, axis=1)))
    gap = float(np.min(vals))
    ok = gap >= -slack
    return CheckReport("superadditivity", bool(ok), samples, seed, gap, None if ok else pairs[worst][1],
                       residuals={"min_superadditive": float(np.min(vals[:, 0])),
                                  "min_det_increment": float(np.min(vals[:, 1]))})


def concavity_check(f: OperatorSpec, samples: int = 200, seed: int = 42, taus=(0.25, 0.5, 0.75),
                    slack: float = 1e-9) -> CheckReport:
    """F(tA + (1-t)B)^(1/N) >= t F(A)^(1/N) + (1-t) F(B)^(1/N) on seeded positive pairs."""
    big_n = f.degree
    pairs = _pairs(f, samples, seed)
    worst_gap, witness = math.inf, None
    for a, b in pairs:
        ra = f._evaluate(a) ** (1.0 / big_n)
        rb = f._evaluate(b) ** (1.0 / big_n)
        for t in taus:
            gap = f._evaluate(t * a + (1 - t) * b) ** (1.0 / big_n) - t * ra - (1 - t) * rb
            if gap < worst_gap:
                worst_gap, witness = gap, (a, b, t)
    ok = worst_gap >= -slack
    return CheckReport("concavity", bool(ok), samples, seed, float(worst_gap), None if ok else witness[0])


def hadamard_check(a, rtol: float = 1e-10) -> CheckReport:
    """prod a_jj >= det A, directly and through the Cholesky factor."""
    a = as_array(a)
    low = cholesky(a)  # raises NotPositiveDefinite
    diag_prod = float(np.prod(np.diag(a)))
    det_lu = float(lu_det(a))
    det_chol = float(np.prod(np.diag(low)) ** 2)
    # a_jj = sum_k L_jk^2 >= L_jj^2
    row_bound = bool(np.all(np.diag(a) >= np.diag(low) ** 2 * (1 - rtol)))
    gap = diag_prod - det_lu
    ok = gap >= -rtol * abs(diag_prod) and row_bound and abs(det_lu - det_chol) <= 1e-8 * abs(det_lu)
    return CheckReport("hadamard", bool(ok), 1, worst_gap=gap / max(abs(diag_prod), 1e-300),
                       witness=None if ok else a,
                       details={"diagonal_product": diag_prod, "det": det_lu, "det_cholesky": det_chol})


# -- the failing diagonal family --------------------------------------------

def counterexample_ratio(s: float) -> float:
    """F(A)^(1/3) / det(A)^(1/2) for F = a11^2 a22 and A = diag(s, 1)."""
    if not s > 0:
        raise ValueError("s must be positive")
    f = diagonal_counterexample()
    a = np.diag([float(s), 1.0])
    return f(a) ** (1.0 / 3.0) / float(np.prod(np.diag(a))) ** 0.5


def counterexample_scan(gamma: float = 0.5, exponents=range(1, 13)) -> CheckReport:
    """Look for s = 10^-j with F(A)^(1/3) < gamma det(A)^(1/2); success means majorization fails."""
    rows = []
    witness = None
    for j in exponents:
        s = 10.0 ** (-j)
        ratio = counterexample_ratio(s)
        rows.append({"s": s, "ratio": ratio, "sixth_root": s ** (1.0 / 6.0)})
        if witness is None and ratio < gamma:
            witness = np.diag([s, 1.0])
    gap = min(r["ratio"] for r in rows) - gamma
    return CheckReport("counterexample_scan", witness is not None, len(rows), None, gap, witness,
                       details={"gamma": gamma, "scan": rows})


def family_ratio(s: float, big_n: int, n: int) -> float:
    """F^(1/N)/det^(1/(n+1)) at diag(s, 1, ..., 1) for a11^(N-1) (a22+...)/n."""
    f = diagonal_family(big_n, n)
    a = np.diag([float(s)] + [1.0] * n)
    return f(a) ** (1.0 / big_n) / float(s) ** (1.0 / (n + 1))


def family_exponent(big_n: int, n: int) -> float:
    return 1.0 - 1.0 / big_n - 1.0 / (n + 1)


def pogorelov_constant(big_n: int, n: int) -> Fraction:
    """(2/(nN)) (n - 2 + 2/N) as an exact fraction."""
    return Fraction(2, n * big_n) * (n - 2 + Fraction(2, big_n))


def integrate_profile(big_n: int, step: float = 1e-4, t_max: float = 1.0):
    """RK4 for g'' = g^(-1/(N-1)), g(0) = 1, g'(0) = 0; returns (t, g, g')."""
    count = int(round(t_max / step))
    ts = np.linspace(0.0, t_max, count + 1)
    g = np.empty(count + 1)
    dg = np.empty(count + 1)
    g[0], dg[0] = 1.0, 0.0
    power = -1.0 / (big_n - 1)

    def rhs(y, v):
        return v, y ** power

    for i in range(count):
        y, v = g[i], dg[i]
        k1y, k1v = rhs(y, v)
        k2y, k2v = rhs(y + 0.5 * step * k1y, v + 0.5 * step * k1v)
        k3y, k3v = rhs(y + 0.5 * step * k2y, v + 0.5 * step * k2v)
        k4y, k4v = rhs(y + step * k3y, v + step * k3v)
        g[i + 1] = y + step / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y)
        dg[i + 1] = v + step / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return ts, g, dg


def pogorelov_identity(x_sq: float, eps: float, big_n: int, n: int) -> float:
    c = n - 2 + 2.0 / big_n
    return 2.0 / (n * big_n) * (c * x_sq + eps * n) / (x_sq + eps)


def pogorelov_verify(big_n: int = 3, n: int = 2, eps: float = 1e-2, grid: int = 10, seed: int = 0,
                     t_range=(0.1, 0.9), r_range=(0.1, 1.0), rtol: float = 1e-3) -> CheckReport:
    """Finite-difference check that u = g(t)(|x|^2 + eps)^(1/N) satisfies the closed form for F(D^2 u).

    F(D^2 u) = u_tt^(N-1) (1/n) Laplacian_x u, evaluated on a grid x grid set
    of (t, r * direction) points with a seeded unit direction in R^n.
    """
    if big_n < 3 or n < 2:
        raise ValueError("need N >= 3 and n >= 2")
    if not eps > 0:
        raise ValueError("eps must be positive")
    if r_range[0] <= 0:
        raise ValueError("grid must stay away from x = 0")
    ts, g, dg = integrate_profile(big_n)
    d2g = g ** (-1.0 / (big_n - 1))
    spline = CubicHermiteSpline(ts, g, dg)
    direction = np.random.default_rng(seed).standard_normal(n)
    direction /= np.linalg.norm(direction)
    op = diagonal_family(big_n, n)
    k = pogorelov_constant(big_n, n)

    def u(t, x):
        return float(spline(t)) * (float(x @ x) + eps) ** (1.0 / big_n)

    worst_rel, worst_point, min_sub = 0.0, None, math.inf
    for t in np.linspace(*t_range, grid):
        for r in np.linspace(*r_range, grid):
            x = r * direction
            h_t = 1e-4 * (1.0 + abs(t))
            u0 = u(t, x)
            diag = [(u(t + h_t, x) - 2 * u0 + u(t - h_t, x)) / h_t ** 2]
            for j in range(n):
                h = 1e-4 * (1.0 + abs(x[j]))
                e = np.zeros(n)
                e[j] = h
                diag.append((u(t, x + e) - 2 * u0 + u(t, x - e)) / h ** 2)
            value = op(np.diag(diag))
            expected = pogorelov_identity(float(x @ x), eps, big_n, n)
            rel = abs(value - expected) / abs(expected)
            if rel > worst_rel:
                worst_rel, worst_point = rel, (float(t), float(r))
            min_sub = min(min_sub, value - float(k))
    ok = worst_rel <= rtol and min_sub >= -rtol * float(k)
    return CheckReport(
        "pogorelov",
        bool(ok),
        grid * grid,
        seed,
        worst_gap=rtol - worst_rel,
        witness=None if ok else worst_point,
        residuals={"max_relative_deviation": worst_rel, "min_subsolution_slack": min_sub,
                   "ode_g_max": float(np.max(g)), "ode_g_second_min": float(np.min(d2g))},
        details={"N": big_n, "n": n, "eps": eps, "k": str(k), "k_value": float(k)},
    )


# -- ordered-eigenvalue families --------------------------------------------

def ordered_eig_family_check(q: SparseSymPoly, r: SparseSymPoly, samples: int = 200, seed: int = 42) -> CheckReport:
    """Tensor product (equal k) and weighted sum (equal degree) of two central-ray polynomials."""
    qn, rn = q.normalized(), r.normalized()
    rep_q, rep_r = check_basic_lemma(qn), check_basic_lemma(rn)
    if not (rep_q.coefficients_nonneg and rep_q.central_ray_equal and rep_r.coefficients_nonneg and rep_r.central_ray_equal):
        raise PolyError("both inputs must have nonnegative coefficients and satisfy the central ray condition")
    from .operators import real_space

    n = q.nvars + r.nvars
    results: dict = {}
    ok = True
    if abs(rep_q.k - rep_r.k) <= CRH_RTOL * max(1.0, abs(rep_q.k)):
        prod = tensor_product(qn, rn)
        lemma = check_basic_lemma(prod)
        harness = majorization_harness(TensorProduct(real_space(n), qn, rn), samples, seed)
        results["tensor_product"] = {"basic_lemma": lemma.to_dict(), "majorization": harness.to_dict()}
        ok = ok and lemma.passed and harness.passed
    else:
        results["tensor_product"] = {"applicable": False, "reason": "different k"}
    if q.degree == r.degree:
        combo, weights = convex_combination(q, r)
        lemma = check_basic_lemma(combo)
        harness = majorization_harness(ConvexCombo(real_space(n), q, r), samples, seed)
        results["convex_combination"] = {"weights": list(weights), "basic_lemma": lemma.to_dict(),
                                         "majorization": harness.to_dict()}
        ok = ok and lemma.passed and harness.passed
    else:
        results["convex_combination"] = {"applicable": False, "reason": "different degrees"}
    applicable = [k for k, v in results.items() if v.get("applicable", True)]
    if not applicable:
        raise PolyError("neither combinator applies: k values and degrees both differ")
    return CheckReport("ordered_eig_family", bool(ok), samples, seed, details=results)


__all__ = [
    "BasicLemmaReport",
    "MajorizationReport",
    "NotPositiveDefinite",
    "basic_lemma_sample_check",
    "check_basic_lemma",
    "concavity_check",
    "counterexample_ratio",
    "counterexample_scan",
    "default_gamma",
    "determinant_term",
    "family_exponent",
    "family_ratio",
    "hadamard_check",
    "integrate_profile",
    "majorization_gap",
    "majorization_harness",
    "operator_polynomial",
    "ordered_eig_family_check",
    "pogorelov_constant",
    "pogorelov_identity",
    "pogorelov_verify",
    "random_crh_polynomial",
    "superadditivity_check",
    "superadditivity_pair",
]
