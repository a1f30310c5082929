"""Acceptance criteria 1-11 at their stated tolerances.

Each test records one summary line; the conftest prints them after the run.
Criterion 9 has a sub-check whose stated target direction is not the
stationary point of the stated search; it is kept as a strict xfail and the
line for criterion 9 reports FAIL.
"""

import json
import math
from fractions import Fraction

import numpy as np
import pytest

from gdops.cli import main as gd_main
from gdops.cones import (
    angle_between,
    central_ray_check,
    central_ray_search,
    diagonal_basis,
    exhaustion_convexity_check,
    open_polar_test,
    prelevel_harness,
    spd_cone_sampler,
)
from gdops.garding import (
    barrier_harness,
    base_point,
    discriminant_identity_check,
    garding_spectrum,
    gradient_matrix,
    guler_check,
)
from gdops.linalg import Algebra, det_field
from gdops.majorize import (
    basic_lemma_sample_check,
    check_basic_lemma,
    counterexample_ratio,
    counterexample_scan,
    majorization_gap,
    majorization_harness,
    pogorelov_constant,
    pogorelov_verify,
    random_crh_polynomial,
)
from gdops.operators import (
    DiagonalPoly,
    det,
    lagrangian_ma,
    pfold,
    real_space,
    diagonal_counterexample,
    sigma,
)
from gdops.poly import SparseSymPoly
from gdops.sampling import random_space_spd, random_symmetric, sample_rng

RESULTS: dict[int, tuple[bool, str]] = {}


def record(number, ok, note):
    prev = RESULTS.get(number)
    if prev is not None:
        ok = ok and prev[0]
        note = f"{prev[1]}; {note}"
    RESULTS[number] = (bool(ok), note)


def majorization_family():
    ops = []
    for algebra, sizes in (("R", range(3, 7)), ("C", (2, 3)), ("H", (1, 2))):
        for n in sizes:
            ops.extend(sigma(n, k, algebra) for k in range(1, n + 1))
            ops.append(det(n, algebra))
            ops.extend(pfold(n, p, algebra) for p in (2, 3) if p < n)
    return ops


def invariant_family():
    ops = []
    for algebra, sizes in (("R", (2, 3, 4)), ("C", (2,)), ("H", (1,))):
        for n in sizes:
            ops.extend(sigma(n, k, algebra) for k in range(1, n + 1))
            ops.append(det(n, algebra))
            ops.extend(pfold(n, p, algebra) for p in (2, 3) if p < n)
    ops.append(lagrangian_ma(2))
    return ops


def spectrum_family():
    return [sigma(4, 2), sigma(5, 3), det(4), pfold(4, 2), pfold(5, 2), pfold(6, 3),
            det(2, "C"), sigma(3, 2, "C"), det(2, "H"), lagrangian_ma(2), lagrangian_ma(3), diagonal_counterexample()]


# 1 -------------------------------------------------------------------------

def test_criterion_01_basic_lemma():
    worst, ok = math.inf, True
    for i in range(20):
        rng = sample_rng(101, i)
        n = int(rng.integers(2, 5))
        deg = int(rng.integers(2, 5))
        p = random_crh_polynomial(rng, n, deg)
        assert check_basic_lemma(p).passed
        rep = basic_lemma_sample_check(p, samples=1000, seed=i, slack=1e-10)
        worst = min(worst, rep.worst_gap)
        ok = ok and rep.passed
    record(1, ok and worst >= -1e-10, f"20 polynomials x 1000 points, min gap {worst:.3e}")
    assert ok and worst >= -1e-10


# 2 -------------------------------------------------------------------------

def test_criterion_02_invariant_majorization():
    ops = majorization_family()
    worst, worst_eq, bad = math.inf, 0.0, []
    for f in ops:
        rep = majorization_harness(f, samples=500, seed=42)
        worst = min(worst, rep.min_gap)
        if rep.min_gap < -1e-9:
            bad.append(f"{f.kind}{f.to_dict()} {f.space.algebra.value}{f.space.n}")
        worst_eq = max(worst_eq, abs(majorization_gap(f, np.eye(f.space.dim))))
    ok = not bad and worst_eq <= 1e-12
    record(2, ok, f"{len(ops)} operators x 500 samples, min gap {worst:.3e}, |gap(Id)| <= {worst_eq:.1e}")
    assert ok, bad


# 3 -------------------------------------------------------------------------

def test_criterion_03_lagrangian():
    worst = math.inf
    for n in (2, 3):
        rep = majorization_harness(lagrangian_ma(n), samples=500, seed=42)
        worst = min(worst, rep.min_gap)
    s = np.zeros((4, 4))
    s[0, 0], s[1, 1] = 0.5, -0.5
    gap = majorization_gap(lagrangian_ma(2), np.eye(4) + s)
    expected = 1.9365 - 0.9306
    ok = worst >= -1e-9 and abs(gap - expected) <= 1e-4
    record(3, ok, f"min gap {worst:.3e}; hand example gap {gap:.5f} (expected {expected:.4f})")
    assert ok


# 4 -------------------------------------------------------------------------

def test_criterion_04_quaternionic_determinant():
    worst = 0.0
    for i in range(200):
        rng = sample_rng(44, i)
        n = 1 + i % 2
        a = random_space_spd(rng, Algebra.QUAT, n)
        real = float(np.prod(np.linalg.eigvalsh(a)))
        worst = max(worst, abs(det_field(a, Algebra.QUAT) ** 4 - real) / real)
    a_, b_ = 3.7, 0.45
    block = abs(det_field(np.diag([a_] * 4 + [b_] * 4), Algebra.QUAT) - a_ * b_)
    ok = worst <= 1e-8 and block <= 1e-10
    record(4, ok, f"max rel err {worst:.2e} over 200 samples; block-scalar err {block:.1e}")
    assert ok


# 5 -------------------------------------------------------------------------

def test_criterion_05_garding_spectrum():
    worst_fac, worst_shift = 0.0, 0.0
    for f in spectrum_family():
        d = f.space.dim
        for i in range(200):
            rng = sample_rng(55, i)
            b = random_symmetric(rng, d)
            t = float(rng.uniform(-3.0, 3.0))
            s = garding_spectrum(f, None, b)
            shifted = garding_spectrum(f, None, b + t * np.eye(d))
            scale = max(1.0, float(np.max(np.abs(s.values))))
            worst_fac = max(worst_fac, s.factorization_residual, shifted.factorization_residual)
            worst_shift = max(worst_shift, float(np.max(np.abs(shifted.values - s.values - t))) / scale)
    lam = garding_spectrum(sigma(3, 2), None, np.diag([1.0, 2.0, 3.0])).values
    root_err = float(np.max(np.abs(lam - [2 - 1 / math.sqrt(3), 2 + 1 / math.sqrt(3)])))
    ok = worst_fac <= 1e-7 and worst_shift <= 1e-7 and root_err <= 1e-9
    record(5, ok, f"factorization {worst_fac:.1e}, shift {worst_shift:.1e}, sigma2 roots {root_err:.1e}")
    assert ok


# 6 -------------------------------------------------------------------------

def test_criterion_06_barrier_derivatives():
    ops = [sigma(3, 2), det(3), pfold(4, 2), det(2, "C"), lagrangian_ma(2)]
    log_err, guler_gap, disc_err, ok = 0.0, math.inf, 0.0, True
    for f in ops:
        rep = barrier_harness(f, samples=100, seed=66, rtol=1e-4)
        ok = ok and rep.passed
        log_err = max(log_err, max(rep.residuals["log_derivative_rel_err"].values()))
        guler_gap = min(guler_gap, rep.residuals["guler_min_gap"])
        disc_err = max(disc_err, rep.residuals["discriminant_rel_err"])
    # equality on single-eigenvalue directions
    eq_gap = 0.0
    for i in range(20):
        rng = sample_rng(67, i)
        f = det(3)
        b = np.zeros((3, 3))
        b[i % 3, i % 3] = float(rng.uniform(-3, 3))
        for k, l in ((3, 2), (4, 2), (4, 4)):
            g = guler_check(f, np.eye(3), b, k, l)
            ok = ok and g.passed
            eq_gap = max(eq_gap, abs(g.worst_gap))
    hand = discriminant_identity_check(det(2), np.eye(2), np.diag([1.0, -1.0]))
    hand_ok = hand.passed and abs(hand.details["predicted_root"] + 1.0) <= 1e-12 \
        and abs(hand.details["fd_root"] + 1.0) <= 1e-4
    ok = ok and hand_ok and eq_gap <= 1e-9
    record(6, ok, f"log-derivative rel err {log_err:.1e}, Guler min gap {guler_gap:.2e}, equality {eq_gap:.1e}, "
                  f"discriminant rel err {disc_err:.1e}, hand value {hand.details['fd_root']:.6f}")
    assert ok


# 7 -------------------------------------------------------------------------

def test_criterion_07_gradient_completeness():
    complete = [sigma(3, 1), sigma(3, 2), det(3), pfold(3, 2), pfold(4, 2), sigma(2, 2, "C"), det(1, "H"),
                lagrangian_ma(2)]
    worst = math.inf
    for f in complete:
        for i in range(100):
            a = base_point(f, sample_rng(77, i))
            g = gradient_matrix(f, a)
            worst = min(worst, float(np.min(np.linalg.eigvalsh(0.5 * (g + g.T)))))
    incomplete = [
        DiagonalPoly(real_space(4), SparseSymPoly.from_terms(3, [((1, 1, 1), 1.0)])),
        DiagonalPoly(real_space(2), SparseSymPoly.from_terms(1, [((1,), 1.0)])),
    ]
    flagged = []
    for f in incomplete:
        a = base_point(f, sample_rng(78, 0))
        g = gradient_matrix(f, a)
        flagged.append(float(np.min(np.linalg.eigvalsh(g))) <= 1e-9 * float(np.max(np.abs(g))))
    ok = worst > 0 and all(flagged)
    record(7, ok, f"min gradient eigenvalue {worst:.3e} over complete operators; incomplete flagged {flagged}")
    assert ok


# 8 -------------------------------------------------------------------------

def test_criterion_08_counterexamples():
    ratios = {s: counterexample_ratio(s) for s in (1.0, 1e-6)}
    ratio_ok = all(abs(r - s ** (1 / 6)) <= 4 * np.finfo(float).eps * s ** (1 / 6) for s, r in ratios.items())
    scan = counterexample_scan(0.5)
    devs, ks = [], []
    expected_k = {(3, 2): Fraction(2, 9), (3, 3): Fraction(10, 27), (4, 2): Fraction(1, 8)}
    pog_ok = True
    for (big_n, n), k in expected_k.items():
        rep = pogorelov_verify(big_n, n, eps=1e-2)
        pog_ok = pog_ok and rep.passed and pogorelov_constant(big_n, n) == k and rep.details["k"] == str(k)
        devs.append(rep.residuals["max_relative_deviation"])
        ks.append(rep.details["k"])
    ok = ratio_ok and scan.passed and pog_ok and max(devs) <= 1e-3
    record(8, ok, f"ratio(1e-6) = {ratios[1e-6]!r}; scan witness s = {scan.witness[0, 0]:.0e}; "
                  f"k = {', '.join(ks)}; max deviation {max(devs):.1e}")
    assert ok


# 9 -------------------------------------------------------------------------

def test_criterion_09_central_ray_invariant():
    worst_k, worst_dev, worst_angle = 0.0, 0.0, 0.0
    for f in invariant_family():
        rep = central_ray_check(f)
        worst_k = max(worst_k, abs(rep.k_hat - rep.k_theory))
        worst_dev = max(worst_dev, rep.deviation)
        res = central_ray_search(f, seed=9, restarts=5)
        worst_angle = max(worst_angle, angle_between(res.ray_point, np.eye(f.space.dim)))
    ok = worst_k <= 1e-8 and worst_dev <= 1e-8 and worst_angle <= 1e-6
    record(9, ok, f"|k_hat - N/dim| <= {worst_k:.1e}, deviation <= {worst_dev:.1e}, angle to Id <= {worst_angle:.1e}")
    assert ok


def _diagonal_model_search():
    return central_ray_search(diagonal_counterexample(), seed=9, restarts=5, basis=diagonal_basis(2))


def test_criterion_09_diagonal_model_stationary_ray():
    res = _diagonal_model_search()
    angle = angle_between(res.ray_point, np.diag([math.sqrt(2.0), 1.0]))
    record(9, angle <= 1e-4, f"diagonal model: search ends at {np.round(np.diag(res.ray_point), 6).tolist()}, "
                             f"angle {angle:.1e} to (sqrt2, 1)")
    assert angle <= 1e-4


@pytest.mark.xfail(strict=True, reason="diag(2,1) is not where D_B F = k B on the unit sphere; the search "
                                       "finds (sqrt2, 1). Recorded in the decisions ledger.")
def test_criterion_09_diagonal_model_stated_target():
    res = _diagonal_model_search()
    angle = angle_between(res.ray_point, np.diag([2.0, 1.0]))
    record(9, angle <= 1e-4, f"stated target diag(2,1): angle {angle:.2e} > 1e-4 (expected failure)")
    assert angle <= 1e-4


# 10 ------------------------------------------------------------------------

def test_criterion_10_cones():
    polar = open_polar_test(np.eye(3), spd_cone_sampler(3), samples=1000, seed=42)
    pre_det = prelevel_harness(det(3), np.eye(3), 5.0, samples=10_000, seed=42)
    pre_s2 = prelevel_harness(sigma(3, 2), np.eye(3), 5.0, samples=10_000, seed=42)
    conv = exhaustion_convexity_check(sigma(3, 2), np.eye(3), samples=500, seed=42, slack=1e-9)
    ok = polar.passed and polar.epsilon_hat >= 0.9 and pre_det.passed and pre_s2.passed and conv.passed
    record(10, ok, f"epsilon_hat {polar.epsilon_hat:.4f}; R(det) {pre_det.details['R']:.1f} vs max radius "
                   f"{pre_det.details['max_radius_found']:.3f}; R(sigma2) {pre_s2.details['R']:.1f} vs "
                   f"{pre_s2.details['max_radius_found']:.3f}; convexity min gap {conv.worst_gap:.3e}")
    assert ok


# 11 ------------------------------------------------------------------------

CLI_RUNS = [
    ["majorize", "--builtin", "pfold", "--n", "4", "--p", "2", "--samples", "500", "--seed", "7"],
    ["majorize", "--builtin", "det", "--n", "2", "--algebra", "H", "--samples", "500", "--seed", "7"],
    ["counterexample", "pogorelov", "--N", "3", "--n", "2", "--eps", "1e-2"],
    ["counterexample", "scan"],
    ["central-ray", "--builtin", "sigma", "--n", "3", "--k", "2", "--search", "--restarts", "3"],
    ["central-ray", "--builtin", "diag-counterexample", "--search", "--diagonal-model", "--restarts", "3"],
]


def test_criterion_11_cli_determinism(capsys):
    identical = True
    for args in CLI_RUNS:
        outputs = set()
        for _ in range(5):
            gd_main(args)
            env = json.loads(capsys.readouterr().out)
            env.pop("tool_version")
            outputs.add(json.dumps(env, sort_keys=True))
        identical = identical and len(outputs) == 1
    record(11, identical, f"{len(CLI_RUNS)} commands x 5 runs byte-identical: {identical}")
    assert identical
