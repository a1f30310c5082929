import math

import numpy as np
import pytest

from gdops.garding import (
    ConeViolation,
    GardingError,
    barrier_harness,
    discriminant_identity_check,
    edge_and_span,
    factorization_residual,
    garding_spectrum,
    gradient_matrix,
    guler_check,
    i_eigenvalues,
    in_garding_cone,
    is_hyperbolic,
    log_derivative,
    log_derivative_fd,
    monotonicity_check,
)
from gdops.operators import DiagonalPoly, det, lagrangian_ma, pfold, real_space, sigma, sum_of_squares_operator
from gdops.poly import SparseSymPoly
from gdops.sampling import random_spd_conditioned, random_symmetric, sample_rng


def test_sigma2_quadratic_formula():
    lam = garding_spectrum(sigma(3, 2), None, np.diag([1.0, 2.0, 3.0])).values
    assert np.allclose(lam, [2 - 1 / math.sqrt(3), 2 + 1 / math.sqrt(3)], atol=1e-9)


def test_det_spectrum_is_matrix_spectrum(rng):
    b = random_symmetric(rng, 4)
    assert np.allclose(i_eigenvalues(det(4), b), np.linalg.eigvalsh(b), atol=1e-9)


def test_relative_eigenvalues_for_det(rng):
    a = random_spd_conditioned(rng, 3)
    b = random_symmetric(rng, 3)
    low = np.linalg.cholesky(a)
    inv = np.linalg.inv(low)
    expected = np.linalg.eigvalsh(inv @ b @ inv.T)
    assert np.allclose(garding_spectrum(det(3), a, b).values, expected, atol=1e-8)


@pytest.mark.parametrize("f", [sigma(4, 2), pfold(4, 2), pfold(4, 3), lagrangian_ma(2), det(2, "H")],
                         ids=["s2", "pf2", "pf3", "lag2", "detH"])
def test_shift_covariance_and_factorization(f):
    for i in range(5):
        rng = sample_rng(11, i)
        b = random_symmetric(rng, f.space.dim)
        t = float(rng.uniform(-2, 2))
        lam = garding_spectrum(f, None, b)
        shifted = garding_spectrum(f, None, b + t * np.eye(f.space.dim)).values
        assert lam.factorization_residual <= 1e-7
        assert np.allclose(shifted, lam.values + t, atol=1e-7 * max(1.0, np.max(np.abs(lam.values))))


def test_zero_eigenvalues_reported_as_degree_drop():
    s = garding_spectrum(det(3), None, np.diag([1.0, 0.0, 2.0]))
    assert s.degree_drop == 1
    assert np.allclose(s.values, [0, 1, 2])


def test_errors_for_bad_base_points():
    with pytest.raises(GardingError):
        garding_spectrum(det(2), np.diag([1.0, 0.0]), np.eye(2))
    with pytest.raises(ConeViolation):
        log_derivative(det(2), np.diag([1.0, -1.0]), np.eye(2), 1)


def test_cone_membership():
    assert in_garding_cone(sigma(3, 2), np.eye(3))
    assert in_garding_cone(sigma(3, 1), np.diag([2.0, 2.0, -1.0]))
    assert not in_garding_cone(det(3), np.diag([2.0, 2.0, -1.0]))


def test_hyperbolicity_detection():
    assert is_hyperbolic(sigma(3, 2), sample_count=30).passed
    rep = is_hyperbolic(sum_of_squares_operator(3), sample_count=30)
    assert not rep.passed and rep.witness is not None


def test_edge_of_cone():
    assert edge_and_span(sigma(2, 1)).edge_dim == 2
    assert edge_and_span(det(2)).edge_dim == 0
    x1x2 = DiagonalPoly(real_space(2), SparseSymPoly.from_terms(2, [((1, 1), 1.0)]))
    edge = edge_and_span(x1x2)
    assert edge.edge_dim == 1
    e = edge.edge_basis[0]
    assert abs(e[0, 0]) < 1e-9 and abs(e[1, 1]) < 1e-9


def test_log_derivative_hand_value():
    # lambda = (1, 2, 3), k = 3: 2! * 36 = 72 with sign +; k = 2: -(1+4+9)
    a, b = np.eye(3), np.diag([1.0, 2.0, 3.0])
    assert log_derivative(det(3), a, b, 3) == pytest.approx(72.0)
    assert log_derivative(det(3), a, b, 2) == pytest.approx(-14.0)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_log_derivative_against_finite_differences(k, rng):
    f = sigma(3, 2)
    a = random_spd_conditioned(rng, 3)
    b = random_symmetric(rng, 3)
    fd, ref = log_derivative_fd(f, a, b, k)
    assert abs(log_derivative(f, a, b, k) - fd) <= 1e-4 * ref


def test_guler_equality_on_single_eigenvalue_direction():
    rep = guler_check(det(3), np.eye(3), np.diag([0.0, 0.0, 2.0]), 4, 2)
    assert rep.passed and abs(rep.worst_gap) <= 1e-9
    rep = guler_check(det(3), np.eye(3), np.diag([1.0, -2.0, 0.5]), 3, 2)
    assert rep.passed and rep.worst_gap > 0
    with pytest.raises(ValueError):
        guler_check(det(3), np.eye(3), np.eye(3), 3, 3)


def test_discriminant_hand_value():
    rep = discriminant_identity_check(det(2), np.eye(2), np.diag([1.0, -1.0]))
    assert rep.passed
    assert rep.details["predicted_root"] == pytest.approx(-1.0)
    assert rep.details["fd_root"] == pytest.approx(-1.0, rel=1e-6)


def test_gradient_of_sigma2_at_identity():
    assert np.allclose(gradient_matrix(sigma(3, 2), np.eye(3)), 2 * np.eye(3), atol=1e-10)


def test_gradient_degenerate_for_incomplete_diagonal_operator():
    f = DiagonalPoly(real_space(4), SparseSymPoly.from_terms(3, [((1, 1, 1), 1.0)]))
    g = gradient_matrix(f, np.diag([1.0, 2.0, 3.0, 4.0]))
    assert np.min(np.linalg.eigvalsh(g)) <= 1e-9


def test_barrier_harness_small():
    rep = barrier_harness(sigma(3, 2), samples=5, seed=1)
    assert rep.passed, rep.to_dict()


def test_monotonicity():
    assert monotonicity_check(pfold(3, 2), samples=20).passed


def test_factorization_residual_small(rng):
    assert factorization_residual(pfold(4, 2), np.eye(4), random_symmetric(rng, 4)) <= 1e-10


from hypothesis import given, strategies as st


@given(st.integers(0, 2**31), st.floats(-3, 3), st.sampled_from(["s2", "pf", "det"]))
def test_shift_covariance_property(seed, t, which):
    f = {"s2": sigma(4, 2), "pf": pfold(4, 2), "det": det(3)}[which]
    b = random_symmetric(np.random.default_rng(seed), f.space.dim)
    lam = garding_spectrum(f, None, b).values
    shifted = garding_spectrum(f, None, b + t * np.eye(f.space.dim)).values
    assert np.allclose(shifted, lam + t, atol=1e-7 * max(1.0, np.max(np.abs(lam))))
