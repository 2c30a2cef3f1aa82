"""Stationarity residuals, enumeration oracles, curvature diagnostics."""

import math

import numpy as np
import pytest

from dcmin.optimality import (
    CWS_FLAG_TOL,
    EnumRow,
    classify,
    cws_residual,
    enumerate_problem59,
    enumerate_problem61,
    enumerate_problem62,
    hessian_containment,
    pca_closed_form,
    pca_gradient,
    pca_hessian,
    pca_hessian_bounds,
    problem59,
    quadratic_growth_check,
    sca_residual,
)
from dcmin.problem import DcProblem, QuadForm, ScaledNorm2, Zero, build_pca


def showcase_1d() -> DcProblem:
    """min (x-1)^2 - 4|x|, written as quadratic + linear minus a norm."""
    return DcProblem(n=1, f=QuadForm(2.0, None, np.array([-2.0])), h=Zero(),
                     g=ScaledNorm2(4.0), c=np.array([2.0]), L=2.0, constant=1.0)


# ------------------------------------------------------------- residuals

def test_showcase_classification():
    prob = showcase_1d()
    for x in (-1.0, 0.0, 3.0):
        rep = classify(prob, np.array([x]))
        assert rep.sca_residual <= 1e-8, x       # all three are critical
    # only the global minimizer survives the coordinate-wise test
    assert classify(prob, np.array([3.0])).is_cws()
    assert not classify(prob, np.array([-1.0])).is_cws()
    assert not classify(prob, np.array([0.0])).is_cws()
    # a non-critical point fails both residuals
    rep = classify(prob, np.array([1.0]))
    assert rep.sca_residual > 1e-3
    assert rep.cws_residual > 1e-3
    assert rep.F_value == pytest.approx(prob.evaluate(np.array([1.0])))


def test_residuals_vanish_at_global_minimum():
    rng = np.random.default_rng(3)
    B = rng.standard_normal((6, 6))
    C = B.T @ B
    prob = build_pca(C)
    x_opt, F_opt, _ = pca_closed_form(C)
    assert cws_residual(prob, x_opt) <= CWS_FLAG_TOL
    assert sca_residual(prob, x_opt) <= 1e-8
    assert prob.evaluate(x_opt) == pytest.approx(F_opt, abs=1e-9)


def test_cws_residual_positive_off_stationarity():
    prob = build_pca(np.diag([4.0, 1.0]))
    assert cws_residual(prob, np.array([0.3, 0.7])) > 1e-4


def test_worst_index_points_at_largest_step():
    prob = build_pca(np.diag([9.0, 1.0]))
    # from a point aligned with the weak axis, the strong axis moves most
    rep = classify(prob, np.array([0.0, 1.0]))
    assert rep.worst_index == 0


def test_quadratic_growth_at_cws_point():
    rng = np.random.default_rng(5)
    B = rng.standard_normal((5, 5))
    C = B.T @ B
    x_opt, _, _ = pca_closed_form(C)
    worst = quadratic_growth_check(build_pca(C), x_opt, rho_bound=1.0,
                                   n_samples=300, radius=0.5)
    assert worst <= 1e-9


# ----------------------------------------------------------- enumeration

def test_problem59_rows():
    rows = enumerate_problem59()
    assert len(rows) == 27
    assert len({r.y_pattern for r in rows}) == 27
    by_label = {r.y_pattern: r for r in rows}
    r = by_label["[-1; -1; -1]"]
    np.testing.assert_allclose(r.x, [-2.25, -4.0, -5.0], atol=1e-9)
    assert r.F == pytest.approx(-18.625, abs=1e-9)
    assert by_label["[+1; +1; +1]"].F == pytest.approx(-6.625, abs=1e-9)
    assert sum(r.cws for r in rows) == 1
    assert all(not r.cws or r.critical for r in rows)  # cws implies critical
    # infeasible patterns carry no point
    assert any(r.x is None or not r.critical for r in rows)


def test_problem59_objective_consistency():
    prob = problem59()
    for r in enumerate_problem59():
        if r.x is not None:
            assert r.F == pytest.approx(prob.evaluate(r.x), abs=1e-12)


def test_problem61_rows():
    rows = enumerate_problem61()
    assert len(rows) == 7  # +/- pairs for three eigenvalues, plus 0
    lam = np.sort(np.linalg.eigvalsh(
        np.array([[30.0, 10.0, 1.0], [10.0, 6.0, -3.0], [1.0, -3.0, 6.0]])))[::-1]
    # each +/- sqrt(lam_k) u_k attains F = -lam_k / 2
    for k in range(3):
        pair = [r for r in rows if f"lam{k + 1}" in r.y_pattern]
        assert len(pair) == 2
        for r in pair:
            assert r.F == pytest.approx(-lam[k] / 2.0, abs=1e-9)
    # only the leading pair is coordinate-wise stationary
    cws = [r for r in rows if r.cws]
    assert len(cws) == 2
    assert all("lam1" in r.y_pattern for r in cws)
    zero = [r for r in rows if r.y_pattern == "0"][0]
    assert zero.F == 0.0 and not zero.cws


def test_problem62_rows():
    rows = enumerate_problem62()
    assert len(rows) == 8
    Fs = sorted(set(round(r.F, 9) for r in rows))
    assert Fs == [-10.5, -9.0, -4.0, -2.5]
    for v in Fs:  # the +/- dual vertices pair up exactly
        assert sum(1 for r in rows if round(r.F, 9) == v) == 2
    cws = [r for r in rows if r.cws]
    assert len(cws) == 2
    assert all(r.F == pytest.approx(-10.5, abs=1e-9) for r in cws)


def test_enum_rows_are_frozen():
    row = enumerate_problem62()[0]
    assert isinstance(row, EnumRow)
    with pytest.raises(AttributeError):
        row.F = 0.0


# -------------------------------------------------------- pca diagnostics

def test_pca_closed_form_criticals_have_zero_gradient():
    rng = np.random.default_rng(7)
    B = rng.standard_normal((6, 6))
    C = B.T @ B
    alpha = 1.5
    x_opt, F_opt, critical = pca_closed_form(C, alpha)
    assert len(critical) == 13  # 0 and +/- pairs for 6 positive eigenvalues
    for x in critical:
        assert np.linalg.norm(pca_gradient(C, alpha, x)) <= 1e-8
    lam = np.linalg.eigvalsh(C).max()
    assert F_opt == pytest.approx(-lam / (2.0 * alpha), rel=1e-10)
    assert build_pca(C, alpha).evaluate(x_opt) == pytest.approx(F_opt, abs=1e-9)


def test_pca_gradient_matches_finite_difference():
    rng = np.random.default_rng(11)
    B = rng.standard_normal((5, 5))
    C = B.T @ B
    x = rng.standard_normal(5)
    eps = 1e-6
    F = lambda z: 0.5 * np.dot(z, z) - math.sqrt(max(z @ C @ z, 0.0))
    g = pca_gradient(C, 1.0, x)
    for i in range(5):
        e = np.zeros(5)
        e[i] = eps
        assert g[i] == pytest.approx((F(x + e) - F(x - e)) / (2 * eps),
                                     rel=1e-4, abs=1e-6)


def test_pca_hessian_matches_finite_difference():
    rng = np.random.default_rng(13)
    B = rng.standard_normal((4, 4))
    C = B.T @ B
    x = rng.standard_normal(4)
    H = pca_hessian(C, 1.0, x)
    np.testing.assert_allclose(H, H.T, atol=1e-12)
    eps = 1e-6
    for i in range(4):
        e = np.zeros(4)
        e[i] = eps
        col = (pca_gradient(C, 1.0, x + e) - pca_gradient(C, 1.0, x - e)) / (2 * eps)
        np.testing.assert_allclose(H[:, i], col, rtol=1e-4, atol=1e-5)
    with pytest.raises(ValueError):
        pca_hessian(C, 1.0, np.zeros(4))


def test_pca_hessian_bounds_and_containment():
    rng = np.random.default_rng(17)
    B = rng.standard_normal((5, 5))
    C = B.T @ B
    lam = np.sort(np.linalg.eigvalsh(C))[::-1]
    sigma0, tau0, varpi_bar = pca_hessian_bounds(C, 0.0)
    assert sigma0 == pytest.approx(1.0 - lam[1] / lam[0], rel=1e-10)
    assert tau0 > 1.0 and varpi_bar > 0.0
    # shrinking the ball can only improve the lower bound
    sigma_half, _, _ = pca_hessian_bounds(C, 0.5 * varpi_bar)
    assert sigma_half < sigma0
    assert hessian_containment(C, 0.5 * varpi_bar) <= 1e-6
    with pytest.raises(ValueError):
        pca_hessian_bounds(np.eye(3), 0.1)  # lambda_1 = lambda_2
    with pytest.raises(ValueError):
        pca_hessian_bounds(C, -1.0)
