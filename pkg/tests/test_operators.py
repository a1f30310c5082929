import json
import math

import numpy as np
import pytest

from gdops.garding import garding_spectrum
from gdops.linalg import Algebra, structures
from gdops.operators import (
    Compose,
    DiagonalPoly,
    DirectionalDeriv,
    Product,
    SpecError,
    Space,
    builtin,
    delta_I_elementary,
    det,
    dump_operator,
    lagrangian_data,
    lagrangian_ma,
    load_operator,
    operator_from_dict,
    pfold,
    real_space,
    diagonal_counterexample,
    sigma,
    taylor_coefficients,
)
from gdops.poly import elementary_poly, elementary_symmetric, monomial
from gdops.sampling import random_spd, random_symmetric, sample_rng


def test_leaf_values():
    assert sigma(3, 1)(np.eye(3)) == pytest.approx(3.0)
    assert sigma(3, 2)(np.diag([1.0, 2.0, 3.0])) == pytest.approx(11.0)
    assert det(3)(np.diag([1.0, 2.0, 3.0])) == pytest.approx(6.0)
    assert pfold(3, 2)(np.diag([1.0, 2.0, 3.0])) == pytest.approx(60.0)
    assert diagonal_counterexample()(np.diag([5.0, 1.0])) == pytest.approx(25.0)


def test_lagrangian_hand_example():
    n = 2
    jm = structures(Algebra.COMPLEX, n).J
    # a symmetric S anticommuting with J with eigenvalues +-1/2, 0
    s = np.zeros((4, 4))
    s[0, 0], s[1, 1] = 0.5, -0.5
    assert np.allclose(s @ jm, -jm @ s)
    a = np.eye(4) + s
    data = lagrangian_data(a)
    assert data.t == pytest.approx(1.0)
    assert np.allclose(np.sort(data.lambdas), [0.0, 0.5])
    assert lagrangian_ma(2)(a) == pytest.approx(2.5 * 2.5 * 1.5 * 1.5)
    assert lagrangian_ma(2)(np.eye(4)) == pytest.approx(2 ** 4)


def test_degrees_and_dimensions():
    assert Product(real_space(3), (sigma(3, 1), sigma(3, 2))).degree == 3
    assert pfold(3, 2).degree == 3
    assert lagrangian_ma(3).degree == 8
    assert det(2, "H").dimension == (2, 8)


def test_product_is_product():
    a = random_spd(np.random.default_rng(1), 3)
    f = Product(real_space(3), (sigma(3, 1), det(3)))
    assert f(a) == pytest.approx(sigma(3, 1)(a) * det(3)(a))


def test_directional_derivative_node():
    f = DirectionalDeriv(real_space(3), det(3), np.eye(3), 1)
    assert f(np.diag([1.0, 2.0, 3.0])) == pytest.approx(11.0)
    assert f.degree == 2
    with pytest.raises(SpecError):
        DirectionalDeriv(real_space(3), det(3), np.eye(3), 4)


def test_compose_with_elementary_gives_taylor_coefficient():
    # sigma_2 of the det-eigenvalues of A is sigma_2 of the eigenvalues of A
    f = Compose(real_space(3), elementary_poly(3, 2), det(3))
    a = random_spd(np.random.default_rng(4), 3)
    assert f(a) == pytest.approx(sigma(3, 2)(a), rel=1e-9)


def test_spaces_are_checked():
    with pytest.raises(SpecError):
        Product(real_space(3), (sigma(3, 1), sigma(2, 1)))
    with pytest.raises(SpecError):
        sigma(3, 4)
    with pytest.raises(SpecError):
        lagrangian_ma(2).__class__(real_space(2))
    with pytest.raises(SpecError):
        sigma(3, 2)(np.eye(4))


def test_complex_operator_uses_field_eigenvalues(rng):
    a = random_spd(rng, 6)
    f = det(3, "C")
    from gdops.linalg import det_field, project
    assert f(a) == pytest.approx(det_field(project(a, Algebra.COMPLEX), Algebra.COMPLEX), rel=1e-9)


def test_taylor_coefficients_of_det():
    a = np.diag([1.0, 2.0, 3.0])
    c = taylor_coefficients(det(3), a, np.eye(3))
    assert np.allclose(c, [6, 11, 6, 1], rtol=1e-9)


@pytest.mark.parametrize("k,expected", [(1, 11.0), (3, 1.0)])
def test_delta_I_elementary_det(k, expected):
    assert delta_I_elementary(det(3), np.diag([1.0, 2.0, 3.0]), k) == pytest.approx(expected, rel=1e-9)


def test_delta_I_elementary_top_order_is_leading_coefficient(rng):
    f = sigma(3, 2)
    a = random_symmetric(rng, 3)
    # coefficient of t^2 in sigma_2(tI + A) is C(3,2) = 3
    assert delta_I_elementary(f, a, 2) == pytest.approx(3.0, rel=1e-9)
    lam = garding_spectrum(f, None, a).values
    assert delta_I_elementary(f, a, 1) == pytest.approx(elementary_symmetric(lam, 1) * f(np.eye(3)), rel=1e-7)


def test_product_spectrum_is_union(rng):
    a = random_symmetric(rng, 3)
    f, g = sigma(3, 2), det(3)
    both = garding_spectrum(Product(real_space(3), (f, g)), None, a).values
    union = np.sort(np.concatenate([garding_spectrum(f, None, a).values, garding_spectrum(g, None, a).values]))
    assert np.allclose(both, union, atol=1e-7)


def test_json_roundtrip(tmp_path):
    f = Product(real_space(3), (sigma(3, 2), pfold(3, 2)))
    p = tmp_path / "op.json"
    dump_operator(f, p)
    g = load_operator(p)
    a = random_spd(np.random.default_rng(0), 3)
    assert g(a) == pytest.approx(f(a))


def test_json_errors_carry_location(tmp_path):
    with pytest.raises(SpecError, match=r"op\.factors\[1\]"):
        operator_from_dict({"space": {"algebra": "R", "n": 3},
                            "op": {"kind": "product", "factors": [{"kind": "det"}, {"kind": "sigma"}]}})
    with pytest.raises(SpecError, match="unknown"):
        operator_from_dict({"space": {"algebra": "R", "n": 3}, "op": {"kind": "det", "colour": 1}})
    poly = tmp_path / "p.json"
    poly.write_text(json.dumps(monomial((2, 1)).to_dict()))
    f = operator_from_dict({"space": {"algebra": "R", "n": 2}, "op": {"kind": "diagonal", "poly": {"file": "p.json"}}},
                           base=tmp_path)
    assert isinstance(f, DiagonalPoly)


def test_builtin_lookup():
    assert builtin("sigma", n=3, k=2)(np.eye(3)) == pytest.approx(3.0)
    assert builtin("det", n=2, algebra="H").space == Space(Algebra.QUAT, 2)
    with pytest.raises(SpecError):
        builtin("sigma", n=3)
    with pytest.raises(SpecError):
        builtin("nonsense", n=3)


def test_invariance_under_conjugation():
    rng = sample_rng(3, 0)
    a = random_spd(rng, 4)
    q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    f = pfold(4, 2)
    assert f(q @ a @ q.T) == pytest.approx(f(a), rel=1e-10)
    assert math.isclose(sigma(4, 3)(q @ a @ q.T), sigma(4, 3)(a), rel_tol=1e-10)
