"""Dense symmetric matrices over R, C and H (all stored as real matrices).

Complex and quaternionic Hermitian matrices are realized as real symmetric
matrices of size 2n and 4n commuting with fixed complex structures.  The
quaternionic structures act blockwise on groups of four coordinates by left
multiplication with i, j, k.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Mapping

import numpy as np

from . import _backend
from .poly import TruncatedSeries, series_qth_root

MAX_SWEEPS = 100
JACOBI_RTOL = 1e-12
MULTIPLICITY_RTOL = 1e-7
COMMUTE_RTOL = 1e-10


class LinalgError(ValueError):
    pass


class ConvergenceError(LinalgError):
    def __init__(self, residual: float, sweeps: int):
        super().__init__(f"Jacobi did not converge after {sweeps} sweeps (off-diagonal residual {residual:.3e})")
        self.residual = residual
        self.sweeps = sweeps


class NotPositiveDefinite(LinalgError):
    pass


class Algebra(str, enum.Enum):
    REAL = "R"
    COMPLEX = "C"
    QUAT = "H"

    @property
    def factor(self) -> int:
        return {"R": 1, "C": 2, "H": 4}[self.value]

    @classmethod
    def parse(cls, value) -> "Algebra":
        if isinstance(value, Algebra):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise LinalgError(f"unknown algebra {value!r}; expected R, C or H") from None


def scale_of(a: np.ndarray) -> float:
    return max(1.0, float(np.linalg.norm(a)))


@dataclass(frozen=True, eq=False)
class SymmetricMatrix:
    """Real symmetric matrix with an algebra tag; ``n`` counts field dimensions."""

    entries: np.ndarray
    algebra: Algebra = Algebra.REAL

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise LinalgError(f"expected a non-empty square matrix, got shape {a.shape}")
        alg = Algebra.parse(self.algebra)
        if a.shape[0] % alg.factor:
            raise LinalgError(f"dimension {a.shape[0]} is not a multiple of {alg.factor} for algebra {alg.value}")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "algebra", alg)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.dim // self.algebra.factor

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "algebra": self.algebra.value, "entries": self.entries.tolist()}

    @classmethod
    def from_dict(cls, data: Mapping) -> "SymmetricMatrix":
        if not isinstance(data, Mapping):
            raise LinalgError("matrix must be a JSON object")
        unknown = set(data) - {"dim", "algebra", "entries"}
        if unknown:
            raise LinalgError(f"unknown matrix fields {sorted(unknown)}")
        if "entries" not in data:
            raise LinalgError("matrix is missing 'entries'")
        a = np.array(data["entries"], dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise LinalgError(f"entries must be a square array, got shape {a.shape}")
        if "dim" in data and int(data["dim"]) != a.shape[0]:
            raise LinalgError(f"dim {data['dim']} does not match entries of size {a.shape[0]}")
        asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
        if asym > 1e-12 * scale_of(a):
            raise LinalgError(f"matrix is not symmetric (max |a_ij - a_ji| = {asym:.3e})")
        return cls(a, Algebra.parse(data.get("algebra", "R")))


def load_matrix(path: str | Path) -> SymmetricMatrix:
    with open(path) as fh:
        return SymmetricMatrix.from_dict(json.load(fh))


def dump_matrix(m: SymmetricMatrix, path: str | Path) -> None:
    Path(path).write_text(json.dumps(m.to_dict()))


def as_array(a) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise LinalgError(f"expected a square matrix, got shape {arr.shape}")
    return arr


# -- structures -------------------------------------------------------------

_QI = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], dtype=float)
_QJ = np.array([[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]], dtype=float)
_QK = _QI @ _QJ
_CJ = np.array([[0, -1], [1, 0]], dtype=float)


@dataclass(frozen=True, eq=False)
class ComplexStructures:
    dim: int
    J: np.ndarray
    I: np.ndarray | None = None
    K: np.ndarray | None = None

    @property
    def all(self) -> tuple[np.ndarray, ...]:
        return tuple(m for m in (self.I, self.J, self.K) if m is not None)


@lru_cache(maxsize=None)
def structures(algebra: Algebra, n: int) -> ComplexStructures:
    algebra = Algebra.parse(algebra)
    eye = np.eye(n)
    if algebra is Algebra.COMPLEX:
        s = ComplexStructures(2 * n, np.kron(eye, _CJ))
    elif algebra is Algebra.QUAT:
        s = ComplexStructures(4 * n, np.kron(eye, _QJ), np.kron(eye, _QI), np.kron(eye, _QK))
    else:
        raise LinalgError("real matrices carry no complex structure")
    ident = np.eye(s.dim)
    for m in s.all:
        m.setflags(write=False)
        if not np.allclose(m @ m, -ident, atol=1e-15) or not np.allclose(m.T, -m, atol=0):
            raise LinalgError("structure is not an orthogonal complex structure")
    if algebra is Algebra.QUAT:
        for a, b, c in ((s.I, s.J, s.K), (s.J, s.K, s.I), (s.K, s.I, s.J)):
            if not np.allclose(a @ b, c, atol=1e-15):
                raise LinalgError("quaternion relations violated")
    return s


def _structures_for(a: np.ndarray, algebra: Algebra, factor: int) -> ComplexStructures:
    if a.shape[0] % factor:
        raise LinalgError(f"dimension {a.shape[0]} is not divisible by {factor}")
    return structures(algebra, a.shape[0] // factor)


def project_complex(a, s: ComplexStructures | None = None) -> np.ndarray:
    """A_C = (A - JAJ)/2, the orthogonal projection onto J-commuting matrices."""
    a = as_array(a)
    s = s or _structures_for(a, Algebra.COMPLEX, 2)
    if s.dim != a.shape[0]:
        raise LinalgError(f"structure dimension {s.dim} does not match matrix dimension {a.shape[0]}")
    out = 0.5 * (a - s.J @ a @ s.J)
    return 0.5 * (out + out.T)


def project_quaternionic(a, s: ComplexStructures | None = None) -> np.ndarray:
    """A_H = (A - IAI - JAJ - KAK)/4."""
    a = as_array(a)
    s = s or _structures_for(a, Algebra.QUAT, 4)
    if s.dim != a.shape[0] or s.I is None:
        raise LinalgError(f"quaternionic structure of dimension {s.dim} does not match {a.shape[0]}")
    out = 0.25 * (a - s.I @ a @ s.I - s.J @ a @ s.J - s.K @ a @ s.K)
    return 0.5 * (out + out.T)


def project(a, algebra: Algebra) -> np.ndarray:
    algebra = Algebra.parse(algebra)
    if algebra is Algebra.COMPLEX:
        return project_complex(a)
    if algebra is Algebra.QUAT:
        return project_quaternionic(a)
    return as_array(a)


def commutator_norm(a, algebra: Algebra) -> float:
    a = as_array(a)
    algebra = Algebra.parse(algebra)
    if algebra is Algebra.REAL:
        return 0.0
    s = _structures_for(a, algebra, algebra.factor)
    return max(float(np.linalg.norm(a @ m - m @ a)) for m in s.all)


# -- eigenvalues ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Spectrum:
    values: np.ndarray
    residual: float
    sweeps: int = 0
    vectors: np.ndarray | None = None


def eigenvalues_sym(a, vectors: bool = False) -> Spectrum:
    """Eigenvalues (ascending) of a symmetric matrix by cyclic threshold Jacobi."""
    a = as_array(a)
    a = 0.5 * (a + a.T)
    tol = JACOBI_RTOL * scale_of(a)
    diag, v, resid, sweeps, ok = _backend.jacobi_eigh(a, tol, MAX_SWEEPS, vectors)
    if not ok:
        raise ConvergenceError(resid, sweeps)
    order = np.argsort(diag, kind="stable")
    return Spectrum(diag[order], resid, sweeps, v[:, order] if vectors else None)


def field_eigenvalues(a, algebra: Algebra, project_first: bool = True) -> np.ndarray:
    """Eigenvalues over the field: each of the 2 (or 4) real copies listed once."""
    algebra = Algebra.parse(algebra)
    a = project(a, algebra) if project_first else as_array(a)
    values = eigenvalues_sym(a).values
    m = algebra.factor
    if m == 1:
        return values
    groups = values.reshape(-1, m)
    spread = float(np.max(groups[:, -1] - groups[:, 0]))
    if spread > MULTIPLICITY_RTOL * max(1.0, float(np.max(np.abs(values)))):
        raise LinalgError(f"eigenvalue multiplicities are not divisible by {m} (cluster spread {spread:.3e})")
    return groups.mean(axis=1)


# -- determinants -----------------------------------------------------------

def lu_det(a) -> float | complex:
    """Determinant by Gaussian elimination with partial pivoting (real or complex)."""
    u = np.array(a, dtype=complex if np.iscomplexobj(a) else float)
    n = u.shape[0]
    det = 1.0
    for k in range(n):
        p = k + int(np.argmax(np.abs(u[k:, k])))
        if u[p, k] == 0:
            return 0.0 * det
        if p != k:
            u[[k, p]] = u[[p, k]]
            det = -det
        det *= u[k, k]
        if k + 1 < n:
            f = u[k + 1:, k] / u[k, k]
            u[k + 1:, k + 1:] -= np.outer(f, u[k, k + 1:])
    return det


def char_series(a, m: int | None = None) -> TruncatedSeries:
    """Coefficients of det(Id + tA) up to t^m.

    The determinant is evaluated by LU at d+1 points t = r*exp(2 pi i j/(d+1))
    on a circle of radius r = 1/||A||_F and the coefficients are recovered by a
    discrete Fourier transform, which is exact for a degree-d polynomial.
    """
    a = as_array(a)
    d = a.shape[0]
    m = d if m is None else m
    if not 0 <= m <= d:
        raise LinalgError(f"order {m} exceeds dimension {d}")
    norm = float(np.linalg.norm(a))
    r = 1.0 / norm if norm > 0 else 1.0
    count = d + 1
    nodes = r * np.exp(2j * np.pi * np.arange(count) / count)
    ident = np.eye(d)
    values = np.array([lu_det(ident + t * a) for t in nodes])
    coeffs = np.fft.fft(values).real / count
    coeffs = coeffs / r ** np.arange(count)
    coeffs[0] = 1.0
    return TruncatedSeries(m, coeffs[: m + 1])


def det_field(a, algebra: Algebra = Algebra.REAL) -> float:
    """det over R, C or H.

    Over R: product of eigenvalues.  Over C and H the matrix must commute with
    the structures; the determinant is the degree-n coefficient of the square
    (fourth) root of det(Id + tA).
    """
    a = as_array(a)
    algebra = Algebra.parse(algebra)
    if algebra is Algebra.REAL:
        return float(np.prod(eigenvalues_sym(a).values))
    m = algebra.factor
    n = a.shape[0] // m
    viol = commutator_norm(a, algebra)
    if viol > COMMUTE_RTOL * scale_of(a):
        raise LinalgError(f"matrix does not commute with the {algebra.value}-structure (violation {viol:.3e})")
    series = char_series(a, a.shape[0])
    root = series_qth_root(TruncatedSeries(n, series.coeffs[: n + 1]), m)
    return float(root.coeffs[n])


def cholesky(a) -> np.ndarray:
    a = as_array(a)
    n = a.shape[0]
    low = np.zeros_like(a)
    for j in range(n):
        pivot = a[j, j] - float(low[j, :j] @ low[j, :j])
        if not pivot > 0.0:
            raise NotPositiveDefinite(f"not positive definite (pivot {j} = {pivot:.3e})")
        low[j, j] = math.sqrt(pivot)
        if j + 1 < n:
            low[j + 1:, j] = (a[j + 1:, j] - low[j + 1:, :j] @ low[j, :j]) / low[j, j]
    return low


# -- canonical bases --------------------------------------------------------

@lru_cache(maxsize=None)
def _sym_basis(d: int) -> tuple[np.ndarray, ...]:
    out = []
    for i in range(d):
        for j in range(i, d):
            e = np.zeros((d, d))
            if i == j:
                e[i, i] = 1.0
            else:
                e[i, j] = e[j, i] = 1.0 / math.sqrt(2.0)
            e.setflags(write=False)
            out.append(e)
    return tuple(out)


def sym_basis(d: int) -> list[np.ndarray]:
    """Frobenius-orthonormal basis of d x d symmetric matrices."""
    return list(_sym_basis(d))


def sym_to_vec(a) -> np.ndarray:
    a = as_array(a)
    return np.array([float(np.sum(a * e)) for e in _sym_basis(a.shape[0])])


def vec_to_sym(v, d: int) -> np.ndarray:
    return sum((c * e for c, e in zip(v, _sym_basis(d))), np.zeros((d, d)))


def cayley_orthogonal(skew) -> np.ndarray:
    """(I - S)^{-1}(I + S): orthogonal for skew S, commuting with whatever S commutes with."""
    s = np.asarray(skew, dtype=float)
    ident = np.eye(s.shape[0])
    return np.linalg.solve(ident - s, ident + s)
