"""Garding-Dirichlet operators on real, complex and quaternionic symmetric matrices."""

__version__ = "0.1.0"

from . import _backend
from .garding import GardingSpectrum, garding_spectrum, gradient_matrix, i_eigenvalues, in_garding_cone, is_hyperbolic
from .linalg import Algebra, SymmetricMatrix, cholesky, det_field, eigenvalues_sym
from .majorize import check_basic_lemma, majorization_harness
from .operators import OperatorSpec, builtin, delta_I_elementary, load_operator
from .poly import SparseSymPoly, elementary_symmetric
from .reports import CheckReport

BACKEND = _backend.NAME

__all__ = [
    "Algebra",
    "BACKEND",
    "CheckReport",
    "GardingSpectrum",
    "OperatorSpec",
    "SparseSymPoly",
    "SymmetricMatrix",
    "builtin",
    "check_basic_lemma",
    "cholesky",
    "delta_I_elementary",
    "det_field",
    "eigenvalues_sym",
    "elementary_symmetric",
    "garding_spectrum",
    "gradient_matrix",
    "i_eigenvalues",
    "in_garding_cone",
    "is_hyperbolic",
    "load_operator",
    "majorization_harness",
    "__version__",
]
