"""Operator expression trees and their evaluation on symmetric matrices.

An operator is built from leaves (sigma_k, det, p-fold sums, the Lagrangian
Monge-Ampere operator, polynomials of eigenvalues or diagonal entries) and
combinators (products, directional derivatives, composition with a universal
polynomial, and the two ordered-eigenvalue combinators).  Every node knows
its matrix space and degree; evaluation projects onto the C/H-Hermitian
subspace first, so each operator is a function on all real symmetric
matrices of the space's real dimension.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from . import _backend
from .linalg import (
    Algebra,
    as_array,
    eigenvalues_sym,
    field_eigenvalues,
    project_complex,
    scale_of,
    structures,
)
from .poly import (
    PolyError,
    SparseSymPoly,
    convex_combination,
    elementary_symmetric,
    elementary_poly,
    eval_sympoly,
    eval_sympoly_many,
    interpolate_univariate,
    is_permutation_symmetric,
    monomial,
    tensor_product,
)


class SpecError(ValueError):
    """Malformed operator description; the message starts with the offending location."""


class HyperbolicityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Space:
    algebra: Algebra
    n: int

    def __post_init__(self):
        object.__setattr__(self, "algebra", Algebra.parse(self.algebra))
        if int(self.n) < 1:
            raise SpecError(f"space: n must be >= 1, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def dim(self) -> int:
        return self.n * self.algebra.factor

    def identity(self) -> np.ndarray:
        return np.eye(self.dim)

    def to_dict(self) -> dict:
        return {"algebra": self.algebra.value, "n": self.n}


def real_space(n: int) -> Space:
    return Space(Algebra.REAL, n)


def _is_identity(a: np.ndarray) -> bool:
    return a.shape[0] == a.shape[1] and np.array_equal(a, np.eye(a.shape[0]))


class OperatorSpec:
    """Base class; subclasses are frozen dataclasses with a ``space`` field."""

    space: Space
    kind: str = ""
    is_polynomial = True

    @property
    def degree(self) -> int:
        raise NotImplementedError

    @property
    def dimension(self) -> tuple[int, int]:
        return self.space.n, self.space.dim

    def evaluate(self, a) -> float:
        a = as_array(a)
        if a.shape[0] != self.space.dim:
            raise SpecError(f"{self.kind}: matrix of size {a.shape[0]} does not belong to space of dimension {self.space.dim}")
        return self._evaluate(a)

    __call__ = evaluate

    def _evaluate(self, a: np.ndarray) -> float:
        raise NotImplementedError

    def _shifted(self, b: np.ndarray, s: np.ndarray) -> np.ndarray | None:
        """Values of F(s*Id + B) for an array of s, when a cheap route exists."""
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> dict:
        return {"space": self.space.to_dict(), "op": self.to_dict()}


def _field_eigs(a: np.ndarray, space: Space) -> np.ndarray:
    return field_eigenvalues(a, space.algebra)


@dataclass(frozen=True, eq=False)
class _EigenvalueOperator(OperatorSpec):
    """F(A) = f(lambda(A)) for a function of the field eigenvalue list."""

    space: Space

    def _f(self, lam: np.ndarray) -> float:
        raise NotImplementedError

    def _evaluate(self, a):
        return self._f(_field_eigs(a, self.space))

    def _shifted(self, b, s):
        lam = _field_eigs(b, self.space)
        return np.array([self._f(lam + si) for si in s])


@dataclass(frozen=True, eq=False)
class Sigma(_EigenvalueOperator):
    k: int = 1
    kind = "sigma"

    def __post_init__(self):
        if not 1 <= self.k <= self.space.n:
            raise SpecError(f"sigma: need 1 <= k <= n={self.space.n}, got k={self.k}")

    @property
    def degree(self):
        return self.k

    def _f(self, lam):
        return float(_backend.elementary_all(lam)[self.k])

    def to_dict(self):
        return {"kind": "sigma", "k": self.k}


@dataclass(frozen=True, eq=False)
class Det(_EigenvalueOperator):
    kind = "det"

    @property
    def degree(self):
        return self.space.n

    def _f(self, lam):
        return float(np.prod(lam))

    def to_dict(self):
        return {"kind": "det"}


@dataclass(frozen=True, eq=False)
class PFoldSum(_EigenvalueOperator):
    p: int = 1
    kind = "pfold"

    def __post_init__(self):
        if not 1 <= self.p <= self.space.n:
            raise SpecError(f"pfold: need 1 <= p <= n={self.space.n}, got p={self.p}")

    @property
    def degree(self):
        return math.comb(self.space.n, self.p)

    def _f(self, lam):
        return float(_backend.pfold_product(lam, self.p))

    def to_dict(self):
        return {"kind": "pfold", "p": self.p}


@dataclass(frozen=True, eq=False)
class SymPolyOfEigs(_EigenvalueOperator):
    poly: SparseSymPoly = None  # type: ignore[assignment]
    kind = "sympoly"

    def __post_init__(self):
        if self.poly.nvars != self.space.n:
            raise SpecError(f"sympoly: polynomial has {self.poly.nvars} variables, space has n={self.space.n}")
        if not is_permutation_symmetric(self.poly):
            raise SpecError("sympoly: polynomial is not permutation symmetric (use ordered_eig)")

    @property
    def degree(self):
        return self.poly.degree

    def _f(self, lam):
        return eval_sympoly(self.poly, lam)

    def _shifted(self, b, s):
        lam = _field_eigs(b, self.space)
        return eval_sympoly_many(self.poly, lam[None, :] + np.asarray(s)[:, None])

    def to_dict(self):
        return {"kind": "sympoly", "poly": self.poly.to_dict()}


@dataclass(frozen=True, eq=False)
class OrderedEigPoly(_EigenvalueOperator):
    """p applied to the ascending eigenvalue list; continuous, generally not a polynomial."""

    poly: SparseSymPoly = None  # type: ignore[assignment]
    kind = "ordered_eig"
    is_polynomial = False

    def __post_init__(self):
        if self.poly.nvars != self.space.n:
            raise SpecError(f"ordered_eig: polynomial has {self.poly.nvars} variables, space has n={self.space.n}")

    @property
    def degree(self):
        return self.poly.degree

    def _f(self, lam):
        return eval_sympoly(self.poly, np.sort(lam))

    def to_dict(self):
        return {"kind": "ordered_eig", "poly": self.poly.to_dict()}


@dataclass(frozen=True, eq=False)
class ConvexCombo(_EigenvalueOperator):
    """Ordered-eigenvalue operator of the weighted sum of q (low eigenvalues) and r (high ones)."""

    q: SparseSymPoly = None  # type: ignore[assignment]
    r: SparseSymPoly = None  # type: ignore[assignment]
    combined: SparseSymPoly = field(init=False, repr=False)
    weights: tuple[float, float] = field(init=False)
    kind = "convex_combo"
    is_polynomial = False

    def __post_init__(self):
        if self.q.nvars + self.r.nvars != self.space.n:
            raise SpecError(f"convex_combo: {self.q.nvars}+{self.r.nvars} variables do not match n={self.space.n}")
        try:
            combined, weights = convex_combination(self.q, self.r)
        except PolyError as exc:
            raise SpecError(f"convex_combo: {exc}") from None
        object.__setattr__(self, "combined", combined)
        object.__setattr__(self, "weights", weights)

    @property
    def degree(self):
        return self.q.degree

    def _f(self, lam):
        return eval_sympoly(self.combined, np.sort(lam))

    def to_dict(self):
        return {"kind": "convex_combo", "q": self.q.to_dict(), "r": self.r.to_dict()}


@dataclass(frozen=True, eq=False)
class TensorProduct(_EigenvalueOperator):
    """Ordered-eigenvalue operator of q(low eigenvalues) * r(high eigenvalues), both normalized."""

    q: SparseSymPoly = None  # type: ignore[assignment]
    r: SparseSymPoly = None  # type: ignore[assignment]
    combined: SparseSymPoly = field(init=False, repr=False)
    kind = "tensor_product"
    is_polynomial = False

    def __post_init__(self):
        if self.q.nvars + self.r.nvars != self.space.n:
            raise SpecError(f"tensor_product: {self.q.nvars}+{self.r.nvars} variables do not match n={self.space.n}")
        object.__setattr__(self, "combined", tensor_product(self.q.normalized(), self.r.normalized()))

    @property
    def degree(self):
        return self.q.degree + self.r.degree

    def _f(self, lam):
        return eval_sympoly(self.combined, np.sort(lam))

    def to_dict(self):
        return {"kind": "tensor_product", "q": self.q.to_dict(), "r": self.r.to_dict()}


@dataclass(frozen=True, eq=False)
class LagrangianEigData:
    t: float
    lambdas: np.ndarray
    eps_plus: np.ndarray
    eps_minus: np.ndarray

    @property
    def mu(self) -> float:
        return len(self.lambdas) * self.t


def lagrangian_data(a, n: int | None = None) -> LagrangianEigData:
    """Split A on C^n = (R^2n, J) into its trace part t*Id and skew-Hermitian part.

    The Hermitian traceless part is discarded.  The skew part (A + JAJ)/2 has
    eigenvalues +-lambda_j; the n non-negative ones are returned.
    """
    a = as_array(a)
    if a.shape[0] % 2:
        raise SpecError("lagrangian_ma: matrix dimension must be even")
    n = a.shape[0] // 2 if n is None else n
    jm = structures(Algebra.COMPLEX, n).J
    t = float(np.trace(a)) / (2 * n)
    skew = 0.5 * (a + jm @ a @ jm)
    vals = eigenvalues_sym(skew).values
    lam = 0.5 * (vals[::-1][:n] - vals[:n])
    lam = np.maximum(lam, 0.0)
    return LagrangianEigData(t, lam, t + lam, t - lam)


@dataclass(frozen=True, eq=False)
class LagrangianMA(OperatorSpec):
    """prod over 2^n sign choices of (n t +- lambda_1 +- ... +- lambda_n)."""

    space: Space
    kind = "lagrangian_ma"

    def __post_init__(self):
        if self.space.algebra is not Algebra.COMPLEX:
            raise SpecError("lagrangian_ma: space must be complex (algebra C)")

    @property
    def degree(self):
        return 2 ** self.space.n

    def _evaluate(self, a):
        d = lagrangian_data(a, self.space.n)
        return float(_backend.signed_sum_product(d.mu, d.lambdas))

    def _shifted(self, b, s):
        d = lagrangian_data(b, self.space.n)
        n = self.space.n
        return np.array([_backend.signed_sum_product(d.mu + n * si, d.lambdas) for si in s])

    def to_dict(self):
        return {"kind": "lagrangian_ma"}


@dataclass(frozen=True, eq=False)
class DiagonalPoly(OperatorSpec):
    """p(a_11, ..., a_kk) for the first k = nvars diagonal entries of the real matrix."""

    space: Space
    poly: SparseSymPoly = None  # type: ignore[assignment]
    kind = "diagonal"

    def __post_init__(self):
        if self.poly.nvars > self.space.dim:
            raise SpecError(f"diagonal: {self.poly.nvars} variables exceed matrix dimension {self.space.dim}")

    @property
    def degree(self):
        return self.poly.degree

    def _evaluate(self, a):
        return eval_sympoly(self.poly, np.diag(a)[: self.poly.nvars].copy())

    def _shifted(self, b, s):
        d = np.diag(b)[: self.poly.nvars]
        return eval_sympoly_many(self.poly, d[None, :] + np.asarray(s)[:, None])

    def to_dict(self):
        return {"kind": "diagonal", "poly": self.poly.to_dict()}


@dataclass(frozen=True, eq=False)
class Product(OperatorSpec):
    space: Space
    factors: tuple[OperatorSpec, ...] = ()
    kind = "product"

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise SpecError("product: needs at least one factor")
        for i, f in enumerate(self.factors):
            if f.space != self.space:
                raise SpecError(f"product.factors[{i}]: space {f.space} differs from {self.space}")

    @property
    def is_polynomial(self):
        return all(f.is_polynomial for f in self.factors)

    @property
    def degree(self):
        return sum(f.degree for f in self.factors)

    def _evaluate(self, a):
        return math.prod(f._evaluate(a) for f in self.factors)

    def _shifted(self, b, s):
        out = np.ones(len(s))
        for f in self.factors:
            out *= restriction_values(f, None, b, s)
        return out

    def to_dict(self):
        return {"kind": "product", "factors": [f.to_dict() for f in self.factors]}


@dataclass(frozen=True, eq=False)
class DirectionalDeriv(OperatorSpec):
    """A -> d^order/dt^order F(tP + A) at t = 0."""

    space: Space
    inner: OperatorSpec = None  # type: ignore[assignment]
    direction: np.ndarray = None  # type: ignore[assignment]
    order: int = 1
    kind = "directional_deriv"

    def __post_init__(self):
        p = as_array(self.direction).copy()
        if p.shape[0] != self.space.dim:
            raise SpecError(f"directional_deriv.direction: size {p.shape[0]} does not match dimension {self.space.dim}")
        p = 0.5 * (p + p.T)
        p.setflags(write=False)
        object.__setattr__(self, "direction", p)
        if self.inner.space != self.space:
            raise SpecError("directional_deriv.inner: space mismatch")
        if not 0 <= self.order <= self.inner.degree:
            raise SpecError(f"directional_deriv: order {self.order} exceeds inner degree {self.inner.degree}")

    @property
    def degree(self):
        return self.inner.degree - self.order

    def _evaluate(self, a):
        return directional_derivative(self.inner, a, self.direction, self.order)

    def to_dict(self):
        return {
            "kind": "directional_deriv",
            "inner": self.inner.to_dict(),
            "direction": self.direction.tolist(),
            "order": self.order,
        }


@dataclass(frozen=True, eq=False)
class Compose(OperatorSpec):
    """A -> p(lambda^F(A)) for a universal polynomial p in deg(F) variables."""

    space: Space
    outer: SparseSymPoly = None  # type: ignore[assignment]
    inner: OperatorSpec = None  # type: ignore[assignment]
    kind = "compose"

    def __post_init__(self):
        if self.inner.space != self.space:
            raise SpecError("compose.inner: space mismatch")
        if self.outer.nvars != self.inner.degree:
            raise SpecError(f"compose.outer: needs {self.inner.degree} variables, has {self.outer.nvars}")
        if not is_permutation_symmetric(self.outer):
            raise SpecError("compose.outer: polynomial is not permutation symmetric")

    @property
    def degree(self):
        return self.outer.degree

    def _inner_spectrum(self, a):
        from .garding import HYPERBOLICITY_RTOL, garding_spectrum

        spec = garding_spectrum(self.inner, None, a)
        if spec.hyperbolicity_residual > HYPERBOLICITY_RTOL * max(1.0, float(np.max(np.abs(spec.values)))):
            warnings.warn(
                f"compose: inner restriction not real-rooted (residual {spec.hyperbolicity_residual:.2e})",
                HyperbolicityWarning,
                stacklevel=3,
            )
        return spec.values

    def _evaluate(self, a):
        return eval_sympoly(self.outer, self._inner_spectrum(a))

    def _shifted(self, b, s):
        lam = self._inner_spectrum(b)
        return eval_sympoly_many(self.outer, lam[None, :] + np.asarray(s)[:, None])

    def to_dict(self):
        return {"kind": "compose", "outer": self.outer.to_dict(), "inner": self.inner.to_dict()}


# -- restrictions and derivatives ------------------------------------------

def restriction_values(f: OperatorSpec, a, b, s) -> np.ndarray:
    """F(s*A + B) for each s; ``a=None`` means the identity."""
    b = as_array(b)
    s = np.asarray(s, dtype=float)
    a_arr = None if a is None else as_array(a)
    if a_arr is None or _is_identity(a_arr):
        fast = f._shifted(b, s)
        if fast is not None:
            return np.asarray(fast, dtype=float)
        a_arr = np.eye(b.shape[0])
    return np.array([f._evaluate(si * a_arr + b) for si in s])


def chebyshev_nodes(count: int) -> np.ndarray:
    k = np.arange(count)
    return np.cos((2 * k + 1) * np.pi / (2 * count))


def taylor_coefficients(f: OperatorSpec, a, b, degree: int | None = None) -> np.ndarray:
    """Monomial coefficients c_k of t -> F(A + tB), k = 0..degree.

    Interpolates at degree+1 Chebyshev points of [-rho, rho], rho = ||A||/||B||,
    and rescales; the restriction is a polynomial so this is exact up to
    rounding.
    """
    a = as_array(a)
    b = as_array(b)
    deg = f.degree if degree is None else degree
    nb = float(np.linalg.norm(b))
    if nb == 0.0:
        out = np.zeros(deg + 1)
        out[0] = f._evaluate(a)
        return out
    rho = scale_of(a) / nb
    x = chebyshev_nodes(deg + 1)
    vals = np.array([f._evaluate(a + (rho * xi) * b) for xi in x])
    c = interpolate_univariate(x, vals).coeffs
    out = np.zeros(deg + 1)
    out[: len(c)] = c[: deg + 1]
    return out / rho ** np.arange(deg + 1)


def directional_derivative(f: OperatorSpec, a, p, order: int = 1) -> float:
    """d^k/dt^k F(A + tP) at t = 0, as k! times the interpolated Taylor coefficient."""
    if order == 0:
        return f._evaluate(as_array(a))
    c = taylor_coefficients(f, a, p)
    return math.factorial(order) * float(c[order]) if order < len(c) else 0.0


def delta_I_elementary(f: OperatorSpec, a, k: int, rtol: float = 1e-7) -> float:
    """(1/k!) d^k/dt^k F(A + t Id) at t = 0.

    Cross-checked against sigma_{N-k} of the I-eigenvalues of A times F(Id);
    disagreement beyond ``rtol`` raises ArithmeticError.
    """
    from .garding import i_eigenvalues

    big_n = f.degree
    if not 0 <= k <= big_n:
        raise ValueError(f"k={k} must lie in 0..{big_n}")
    a = as_array(a)
    ident = np.eye(f.space.dim)
    direct = directional_derivative(f, a, ident, k) / math.factorial(k)
    via_eigs = elementary_symmetric(i_eigenvalues(f, a), big_n - k) * f._evaluate(ident)
    scale = max(abs(direct), abs(via_eigs), 1e-300)
    if abs(direct - via_eigs) > rtol * scale:
        raise ArithmeticError(f"derivative {direct!r} and eigenvalue route {via_eigs!r} disagree")
    return direct


# -- builders ---------------------------------------------------------------

def sigma(n: int, k: int, algebra="R") -> Sigma:
    return Sigma(Space(algebra, n), k)


def det(n: int, algebra="R") -> Det:
    return Det(Space(algebra, n))


def pfold(n: int, p: int, algebra="R") -> PFoldSum:
    return PFoldSum(Space(algebra, n), p)


def lagrangian_ma(n: int) -> LagrangianMA:
    return LagrangianMA(Space(Algebra.COMPLEX, n))


def diagonal_counterexample() -> DiagonalPoly:
    """a_11^2 a_22 on 2 x 2 real symmetric matrices."""
    return DiagonalPoly(real_space(2), monomial((2, 1)))


def diagonal_family(big_n: int, n: int) -> DiagonalPoly:
    """a_11^(N-1) * (a_22 + ... + a_{n+1,n+1})/n on (n+1) x (n+1) matrices."""
    terms = []
    for j in range(1, n + 1):
        alpha = [0] * (n + 1)
        alpha[0] = big_n - 1
        alpha[j] = 1
        terms.append((alpha, 1.0 / n))
    return DiagonalPoly(real_space(n + 1), SparseSymPoly.from_terms(n + 1, terms))


def sum_of_squares_operator(n: int) -> SymPolyOfEigs:
    """sigma_1^2 - 2 sigma_2 = sum of squared eigenvalues; not hyperbolic."""
    terms = []
    for i in range(n):
        alpha = [0] * n
        alpha[i] = 2
        terms.append((alpha, 1.0))
    return SymPolyOfEigs(real_space(n), SparseSymPoly.from_terms(n, terms))


BUILTIN_NAMES = ("sigma", "det", "pfold", "lagrangian-ma", "diag-counterexample", "diag-family",
                 "sum-squares")


def builtin(name: str, n: int | None = None, k: int | None = None, p: int | None = None,
            algebra: str = "R", big_n: int | None = None) -> OperatorSpec:
    name = name.lower()
    if name == "diag-counterexample":
        return diagonal_counterexample()
    if n is None:
        raise SpecError(f"builtin {name}: --n is required")
    if name == "sigma":
        if k is None:
            raise SpecError("builtin sigma: --k is required")
        return sigma(n, k, algebra)
    if name == "det":
        return det(n, algebra)
    if name == "pfold":
        if p is None:
            raise SpecError("builtin pfold: --p is required")
        return pfold(n, p, algebra)
    if name == "lagrangian-ma":
        return lagrangian_ma(n)
    if name == "diag-family":
        return diagonal_family(big_n or 3, n)
    if name == "sum-squares":
        return sum_of_squares_operator(n)
    raise SpecError(f"unknown builtin {name!r}; choose from {', '.join(BUILTIN_NAMES)}")


def invariant_builtins(algebra="R", n: int = 3) -> list[OperatorSpec]:
    """All sigma_k, det and p-fold sums (p = 2, 3 where defined) on one space."""
    ops: list[OperatorSpec] = [sigma(n, k, algebra) for k in range(1, n + 1)]
    ops.append(det(n, algebra))
    ops.extend(pfold(n, p, algebra) for p in (2, 3) if p <= n)
    return ops


# -- file format ------------------------------------------------------------

def _poly_from(data: Any, where: str, base: Path | None) -> SparseSymPoly:
    if isinstance(data, Mapping) and set(data) == {"file"}:
        data = _read_json(data["file"], where, base)
    if isinstance(data, Mapping) and "elementary" in data:
        e = data["elementary"]
        try:
            return elementary_poly(int(e["n"]), int(e["k"]))
        except (KeyError, TypeError, PolyError) as exc:
            raise SpecError(f"{where}: bad elementary polynomial ({exc})") from None
    try:
        return SparseSymPoly.from_dict(data)
    except PolyError as exc:
        raise SpecError(f"{where}: {exc}") from None


def _read_json(ref: str, where: str, base: Path | None):
    path = Path(ref)
    if base is not None and not path.is_absolute():
        path = base / path
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise SpecError(f"{where}: cannot read {path} ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"{where}: {path} is not valid JSON (line {exc.lineno}, column {exc.colno})") from None


def _matrix_from(data: Any, where: str, base: Path | None, dim: int) -> np.ndarray:
    if isinstance(data, Mapping):
        if set(data) == {"file"}:
            data = _read_json(data["file"], where, base)
        if isinstance(data, Mapping):
            data = data.get("entries")
    try:
        m = np.array(data, dtype=float)
    except (TypeError, ValueError):
        raise SpecError(f"{where}: matrix entries must be numbers") from None
    if m.shape != (dim, dim):
        raise SpecError(f"{where}: expected a {dim}x{dim} matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.T)) > 1e-12 * scale_of(m):
        raise SpecError(f"{where}: direction matrix is not symmetric")
    return m


_FIELDS = {
    "sigma": {"k"},
    "det": set(),
    "pfold": {"p"},
    "lagrangian_ma": set(),
    "sympoly": {"poly"},
    "diagonal": {"poly"},
    "ordered_eig": {"poly"},
    "product": {"factors"},
    "directional_deriv": {"inner", "direction", "order"},
    "compose": {"outer", "inner"},
    "convex_combo": {"q", "r"},
    "tensor_product": {"q", "r"},
}


def parse_operator(node: Any, space: Space, where: str = "op", base: Path | None = None) -> OperatorSpec:
    if not isinstance(node, Mapping):
        raise SpecError(f"{where}: expected an object")
    kind = node.get("kind")
    if kind not in _FIELDS:
        raise SpecError(f"{where}.kind: unknown operator kind {kind!r}")
    extra = set(node) - _FIELDS[kind] - {"kind"}
    if extra:
        raise SpecError(f"{where}: unknown fields {sorted(extra)} for kind {kind!r}")
    missing = {f for f in _FIELDS[kind] if f not in node} - {"order"}
    if missing:
        raise SpecError(f"{where}: missing fields {sorted(missing)}")

    def integer(key):
        try:
            return int(node[key])
        except (TypeError, ValueError):
            raise SpecError(f"{where}.{key}: expected an integer") from None

    try:
        if kind == "sigma":
            return Sigma(space, integer("k"))
        if kind == "det":
            return Det(space)
        if kind == "pfold":
            return PFoldSum(space, integer("p"))
        if kind == "lagrangian_ma":
            return LagrangianMA(space)
        if kind in ("sympoly", "diagonal", "ordered_eig"):
            cls = {"sympoly": SymPolyOfEigs, "diagonal": DiagonalPoly, "ordered_eig": OrderedEigPoly}[kind]
            return cls(space, _poly_from(node["poly"], f"{where}.poly", base))
        if kind == "product":
            factors = node["factors"]
            if not isinstance(factors, list):
                raise SpecError(f"{where}.factors: expected a list")
            return Product(space, tuple(parse_operator(f, space, f"{where}.factors[{i}]", base) for i, f in enumerate(factors)))
        if kind == "directional_deriv":
            inner = parse_operator(node["inner"], space, f"{where}.inner", base)
            direction = _matrix_from(node["direction"], f"{where}.direction", base, space.dim)
            order = integer("order") if "order" in node else 1
            return DirectionalDeriv(space, inner, direction, order)
        if kind == "compose":
            inner = parse_operator(node["inner"], space, f"{where}.inner", base)
            return Compose(space, _poly_from(node["outer"], f"{where}.outer", base), inner)
        q = _poly_from(node["q"], f"{where}.q", base)
        r = _poly_from(node["r"], f"{where}.r", base)
        cls = ConvexCombo if kind == "convex_combo" else TensorProduct
        return cls(space, q, r)
    except SpecError as exc:
        msg = str(exc)
        if msg.startswith(where):
            raise
        raise SpecError(f"{where}: {msg}") from None


def operator_from_dict(data: Any, base: Path | None = None) -> OperatorSpec:
    if not isinstance(data, Mapping):
        raise SpecError("<root>: expected an object with 'space' and 'op'")
    extra = set(data) - {"space", "op"}
    if extra:
        raise SpecError(f"<root>: unknown fields {sorted(extra)}")
    sp = data.get("space")
    if not isinstance(sp, Mapping) or "n" not in sp:
        raise SpecError("space: expected {\"algebra\": ..., \"n\": ...}")
    try:
        space = Space(sp.get("algebra", "R"), int(sp["n"]))
    except (ValueError, TypeError) as exc:
        raise SpecError(f"space: {exc}") from None
    if "op" not in data:
        raise SpecError("op: missing")
    return parse_operator(data["op"], space, "op", base)


def load_operator(path: str | Path) -> OperatorSpec:
    path = Path(path)
    return operator_from_dict(_read_json(str(path), "<file>", None), path.parent)


def dump_operator(f: OperatorSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(f.to_json(), indent=2))
