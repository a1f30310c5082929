import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gdops.linalg import (
    Algebra,
    LinalgError,
    NotPositiveDefinite,
    SymmetricMatrix,
    char_series,
    cholesky,
    commutator_norm,
    det_field,
    eigenvalues_sym,
    field_eigenvalues,
    load_matrix,
    lu_det,
    project,
    project_complex,
    project_quaternionic,
    structures,
)
from gdops.poly import elementary_symmetric
from gdops.sampling import random_space_spd, random_spd, random_symmetric, sample_rng


def test_eigenvalues_of_diagonal_are_sorted():
    assert np.allclose(eigenvalues_sym(np.diag([3.0, 1.0, 2.0])).values, [1, 2, 3])


def test_eigenvalues_identity():
    assert np.allclose(eigenvalues_sym(np.eye(3)).values, [1, 1, 1])


def test_eigenvalues_two_by_two_hand_case():
    assert np.allclose(eigenvalues_sym([[2.0, 1.0], [1.0, 2.0]]).values, [1, 3], atol=1e-14)


@given(st.integers(0, 10_000), st.integers(1, 7))
def test_trace_and_det_match_eigenvalues(seed, d):
    a = random_symmetric(np.random.default_rng(seed), d)
    vals = eigenvalues_sym(a).values
    assert abs(np.sum(vals) - np.trace(a)) <= 1e-10 * max(1.0, np.linalg.norm(a))
    assert np.allclose(vals, np.linalg.eigvalsh(a), atol=1e-11 * max(1.0, np.linalg.norm(a)))
    det = lu_det(a)
    assert abs(np.prod(vals) - det) <= 1e-8 * max(1.0, abs(det))


def test_structures_satisfy_quaternion_relations():
    s = structures(Algebra.QUAT, 2)
    eye = np.eye(8)
    for m in s.all:
        assert np.allclose(m @ m, -eye)
    assert np.allclose(s.I @ s.J, s.K)
    assert np.allclose(s.J @ s.K, s.I)
    assert np.allclose(s.K @ s.I, s.J)
    c = structures(Algebra.COMPLEX, 3)
    assert np.allclose(c.J @ c.J, -np.eye(6))


@pytest.mark.parametrize("algebra,fn", [(Algebra.COMPLEX, project_complex), (Algebra.QUAT, project_quaternionic)])
def test_projection_idempotent_and_self_adjoint(algebra, fn, rng):
    d = 2 * algebra.factor
    a, b = random_symmetric(rng, d), random_symmetric(rng, d)
    pa = fn(a)
    assert np.allclose(fn(pa), pa, atol=1e-14)
    assert commutator_norm(pa, algebra) <= 1e-12 * np.linalg.norm(a)
    assert abs(np.vdot(pa, b) - np.vdot(a, fn(b))) <= 1e-12 * np.linalg.norm(a) * np.linalg.norm(b)
    assert np.allclose(fn(np.eye(d)), np.eye(d))


def test_complex_projection_doubles_eigenvalues(rng):
    vals = eigenvalues_sym(project_complex(random_symmetric(rng, 4))).values
    assert np.allclose(vals[0::2], vals[1::2], atol=1e-12)


def test_quaternionic_projection_n1_is_scalar(rng):
    vals = eigenvalues_sym(project_quaternionic(random_symmetric(rng, 4))).values
    assert np.ptp(vals) <= 1e-12


def test_char_series_small_cases():
    assert np.allclose(char_series(np.diag([1.0, 2.0])).coeffs, [1, 3, 2])
    assert np.allclose(char_series(np.eye(4)).coeffs, [1, 4, 6, 4, 1])


def test_char_series_matches_elementary_symmetric(rng):
    a = random_symmetric(rng, 3)
    vals = np.linalg.eigvalsh(a)
    c = char_series(a).coeffs
    for k in range(4):
        assert abs(c[k] - elementary_symmetric(vals, k)) <= 1e-8 * max(1.0, abs(c[k]))


def test_char_series_order_check():
    with pytest.raises(LinalgError):
        char_series(np.eye(2), 3)


def test_det_field_examples():
    assert det_field(np.diag([1.0, 2.0, 3.0])) == pytest.approx(6.0)
    assert det_field(np.eye(8), Algebra.QUAT) == pytest.approx(1.0, abs=1e-12)
    a, b = 2.5, 0.7
    block = np.diag([a] * 4 + [b] * 4)
    assert abs(det_field(block, Algebra.QUAT) - a * b) <= 1e-10


@pytest.mark.parametrize("algebra,n", [(Algebra.COMPLEX, 2), (Algebra.COMPLEX, 3), (Algebra.QUAT, 1), (Algebra.QUAT, 2)])
def test_field_determinant_power_law(algebra, n):
    for i in range(20):
        a = random_space_spd(sample_rng(7, i), algebra, n)
        real = float(np.prod(np.linalg.eigvalsh(a)))
        field = det_field(a, algebra)
        assert abs(field ** algebra.factor - real) <= 1e-8 * real


def test_det_field_requires_commuting_matrix(rng):
    a = random_spd(rng, 4)
    with pytest.raises(LinalgError):
        det_field(a + np.diag([0, 0, 0, 1.0]), Algebra.QUAT)


def test_field_eigenvalues_half_multiplicity(rng):
    a = random_space_spd(rng, Algebra.COMPLEX, 3)
    lam = field_eigenvalues(a, Algebra.COMPLEX)
    assert lam.size == 3
    assert np.allclose(np.sort(np.repeat(lam, 2)), np.linalg.eigvalsh(a), atol=1e-11)


def test_cholesky_examples():
    assert np.allclose(cholesky(np.eye(3)), np.eye(3))
    assert np.allclose(cholesky(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    assert np.allclose(cholesky([[4.0, 2.0], [2.0, 5.0]]), [[2, 0], [1, 2]])
    with pytest.raises(NotPositiveDefinite):
        cholesky(np.diag([1.0, -1.0]))


def test_cholesky_reconstructs(rng):
    a = random_spd(rng, 5)
    low = cholesky(a)
    assert np.allclose(low @ low.T, a, atol=1e-10 * np.linalg.norm(a))
    assert np.allclose(low, np.tril(low))


def test_matrix_file_roundtrip_and_rejects_asymmetric(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"dim": 2, "algebra": "R", "entries": [[1, 2], [2, 3]]}))
    m = load_matrix(p)
    assert m.dim == 2 and m.algebra is Algebra.REAL
    p.write_text(json.dumps({"dim": 2, "algebra": "R", "entries": [[1, 2], [2.5, 3]]}))
    with pytest.raises(LinalgError, match="not symmetric"):
        load_matrix(p)
    with pytest.raises(LinalgError):
        SymmetricMatrix.from_dict({"entries": [[1]], "colour": 1})


def test_project_dispatch(rng):
    a = random_symmetric(rng, 4)
    assert np.allclose(project(a, Algebra.REAL), a)
    assert np.allclose(project(a, Algebra.QUAT), project_quaternionic(a))
