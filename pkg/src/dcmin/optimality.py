"""Stationarity residuals, point classification, and exact enumeration oracles.

Two computable residuals grade how stationary a point is:

* `cws_residual`  -- mean of squared exact 1-D subproblem minimizers; zero iff
  no single-coordinate move can improve the majorized model (the strong,
  coordinate-wise notion).
* `sca_residual`  -- mean |step| of the convex linearized subproblem, where the
  linearization is allowed to pick the most favorable subgradient of g per
  coordinate; zero exactly at first-order critical points (the weak notion)
  for the separable subdifferential structures, and a relaxation for the
  coupled ones (max-norm composition, top-s).

The `enumerate_problem*` oracles work through three small worked examples
(quadratic-minus-norm objectives with baked-in 3-column matrices) by direct
first-order analysis, and grade each stationary candidate with both residuals.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .linalg import cardano_K, matvec, sym_eig
from .problem import (
    Box,
    DcProblem,
    L1,
    QuadForm,
    build_eig_lp,
    build_pca,
    g_subgrad_interval,
)
from .prox1d import prox_convex_sca
from .solvers import cd_step_snca, make_cache

__all__ = [
    "StationaryReport",
    "EnumRow",
    "classify",
    "cws_residual",
    "sca_residual",
    "quadratic_growth_check",
    "problem59",
    "enumerate_problem59",
    "enumerate_problem61",
    "enumerate_problem62",
    "pca_closed_form",
    "pca_gradient",
    "pca_hessian",
    "pca_hessian_bounds",
    "hessian_containment",
    "CWS_FLAG_TOL",
]

CWS_FLAG_TOL = 1e-9  # residual threshold used when flagging enumeration rows


@dataclass(frozen=True)
class StationaryReport:
    point: np.ndarray
    F_value: float
    cws_residual: float
    sca_residual: float
    worst_index: int  # coordinate with the largest cws step

    def is_cws(self, eps: float = CWS_FLAG_TOL) -> bool:
        return self.cws_residual <= eps


@dataclass(frozen=True)
class EnumRow:
    y_pattern: str
    x: np.ndarray | None
    F: float | None
    critical: bool
    cws: bool


# --------------------------------------------------------------------------
# residuals


def _cws_steps(problem: DcProblem, x, theta: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    cache = make_cache(problem, x)
    return np.array([cd_step_snca(problem, x, i, theta, cache)
                     for i in range(problem.n)])


def cws_residual(problem: DcProblem, x, theta: float = 1e-6) -> float:
    """(1/n) sum of squared global minimizers of the 1-D majorized models."""
    steps = _cws_steps(problem, x, theta)
    return float(np.mean(steps**2))


def _sca_steps(problem: DcProblem, x, theta: float) -> np.ndarray:
    """Per-coordinate |step| of the convex model, minimized over the
    admissible per-coordinate subgradient range of g.

    The step of the convex subproblem is monotone in its linear coefficient,
    so the minimum |step| over the subgradient interval is attained at an
    endpoint, or is 0 when the endpoint steps straddle zero.
    """
    x = np.asarray(x, dtype=float)
    glo, ghi = g_subgrad_interval(problem, x)
    h = problem.h
    rho = h.rho if isinstance(h, L1) else 0.0
    cache = make_cache(problem, x)
    out = np.empty(problem.n)
    for i in range(problem.n):
        a = float(problem.c[i]) + theta
        grad_i = problem.coord_grad_f(x, i, cache)
        lo, hi = problem.feasible_interval(x, i)
        eta_a = prox_convex_sca(a, grad_i - glo[i], h.kind, float(x[i]), rho, lo, hi).eta
        eta_b = prox_convex_sca(a, grad_i - ghi[i], h.kind, float(x[i]), rho, lo, hi).eta
        if eta_a == 0.0 or eta_b == 0.0 or (eta_a < 0.0) != (eta_b < 0.0):
            out[i] = 0.0
        else:
            out[i] = min(abs(eta_a), abs(eta_b))
    return out


def sca_residual(problem: DcProblem, x, theta: float = 1e-6) -> float:
    """(1/n) sum of |convex-model steps|; the critical-point surrogate."""
    return float(np.mean(_sca_steps(problem, x, theta)))


def classify(problem: DcProblem, x, theta: float = 1e-6) -> StationaryReport:
    x = np.asarray(x, dtype=float)
    steps = _cws_steps(problem, x, theta)
    return StationaryReport(
        point=x,
        F_value=problem.evaluate(x),
        cws_residual=float(np.mean(steps**2)),
        sca_residual=float(np.mean(_sca_steps(problem, x, theta))),
        worst_index=int(np.argmax(np.abs(steps))),
    )


def quadratic_growth_check(problem: DcProblem, x_cws, rho_bound: float,
                           theta: float = 1e-6, n_samples: int = 1000,
                           radius: float = 1.0, seed: int = 0) -> float:
    """Empirically probe F(x) - F(x+d) <= 0.5 ||d||^2 weighted by (c+theta+rho).

    Returns the worst violation over sampled d with ||d|| <= radius (restricted
    to the box when h is an indicator); nonpositive means the growth bound
    held on every sample.
    """
    x = np.asarray(x_cws, dtype=float)
    rng = np.random.default_rng(seed)
    w = problem.c + theta + rho_bound
    Fx = problem.evaluate(x)
    worst = -math.inf
    for _ in range(n_samples):
        v = rng.standard_normal(problem.n)
        v *= radius * rng.random() ** (1.0 / problem.n) / np.linalg.norm(v)
        xd = x + v
        if isinstance(problem.h, Box):
            xd = problem.h.project(xd)
        d = xd - x
        gap = Fx - problem.evaluate(xd) - 0.5 * float(np.dot(w, d * d))
        worst = max(worst, gap)
    return worst


# --------------------------------------------------------------------------
# worked enumeration examples
#
# Example 1: min 0.5 x'Qx + <p,x> - ||Ax||_1 with the 3x3 constants below.
# First-order analysis: Qx + p = A'y with y_j = sign((Ax)_j) on rows where
# Ax is nonzero and y_j in [-1,1] on rows where (Ax)_j = 0.  Enumerating the
# 27 sign/interval patterns and solving each pattern's square linear system
# (unknowns x and the interval multipliers) yields every candidate.

_Q59 = np.array([[4.0, 0.0, 0.0], [0.0, 2.0, -1.0], [0.0, -1.0, 1.0]])
_P59 = np.array([1.0, 1.0, 1.0])
_A59 = np.array([[1.0, -1.0, 1.0], [3.0, 1.0, 0.0], [4.0, 2.0, -1.0]])

_A61 = np.array([[1.0, -1.0, 1.0], [2.0, 0.0, 2.0],
                 [3.0, 1.0, 0.0], [4.0, 2.0, -1.0]])

_PIVOT_TOL = 1e-12
_SIGN_TOL = 1e-8


def _solve_square(M: np.ndarray, rhs: np.ndarray) -> np.ndarray | None:
    """Gaussian elimination with partial pivoting; None when a pivot falls
    below the relative threshold (singular pattern system)."""
    M = M.copy()
    rhs = rhs.copy()
    k = M.shape[0]
    scale = max(1.0, float(np.max(np.abs(M))))
    for col in range(k):
        piv = col + int(np.argmax(np.abs(M[col:, col])))
        if abs(M[piv, col]) <= _PIVOT_TOL * scale:
            return None
        if piv != col:
            M[[col, piv]] = M[[piv, col]]
            rhs[[col, piv]] = rhs[[piv, col]]
        for r in range(col + 1, k):
            fac = M[r, col] / M[col, col]
            M[r, col:] -= fac * M[col, col:]
            rhs[r] -= fac * rhs[col]
    out = np.zeros(k)
    for col in range(k - 1, -1, -1):
        out[col] = (rhs[col] - float(np.dot(M[col, col + 1:], out[col + 1:]))) / M[col, col]
    return out


def problem59() -> DcProblem:
    """The first worked example as a DcProblem instance."""
    prob = build_eig_lp(_A59, Q=_Q59, alpha=1.0, p=1)
    # add the linear term <p, x> while keeping the curvature data
    f = QuadForm(1.0, _Q59, _P59)
    return DcProblem(n=3, f=f, h=prob.h, g=prob.g, c=prob.c, L=prob.L)


def enumerate_problem59(theta: float = 1e-6) -> list[EnumRow]:
    prob = problem59()
    rows = []
    for pattern in itertools.product((1, -1, 0), repeat=3):
        label = "[" + "; ".join("int" if s == 0 else f"{s:+d}" for s in pattern) + "]"
        J = [j for j, s in enumerate(pattern) if s != 0]
        I = [j for j, s in enumerate(pattern) if s == 0]
        k = 3 + len(I)
        M = np.zeros((k, k))
        rhs = np.zeros(k)
        # stationarity rows: Qx - sum_{i in I} y_i A_i' = A_J' s_J - p
        M[:3, :3] = _Q59
        for col, i in enumerate(I):
            M[:3, 3 + col] = -_A59[i, :]
        rhs[:3] = sum(pattern[j] * _A59[j, :] for j in J) - _P59 if J else -_P59
        # kink rows: (Ax)_i = 0 for interval rows
        for r, i in enumerate(I):
            M[3 + r, :3] = _A59[i, :]
        sol = _solve_square(M, rhs)
        if sol is None:
            rows.append(EnumRow(label, None, None, False, False))
            continue
        x = sol[:3]
        y_int = sol[3:]
        ax = _A59 @ x
        ok = all(abs(y) <= 1.0 + _SIGN_TOL for y in y_int)
        for j in J:
            if not (abs(ax[j]) > _SIGN_TOL and math.copysign(1.0, ax[j]) == pattern[j]):
                ok = False
        F = prob.evaluate(x)
        cws = bool(ok and cws_residual(prob, x, theta) <= CWS_FLAG_TOL)
        rows.append(EnumRow(label, x, F, bool(ok), cws))
    return rows


def enumerate_problem61(theta: float = 1e-6) -> list[EnumRow]:
    """Quadratic-minus-||Ax||_2: stationary points are 0 and +/- sqrt(l_k) u_k."""
    prob = build_eig_lp(_A61, alpha=1.0, p=2)
    lam, U = sym_eig(_A61.T @ _A61)
    rows = []
    for k in range(len(lam) - 1, -1, -1):  # ascending, as in the worked table
        for sgn in (1.0, -1.0):
            x = sgn * math.sqrt(lam[k]) * U[:, k]
            label = f"{'+' if sgn > 0 else '-'}sqrt(lam{k + 1})*u{k + 1}"
            F = prob.evaluate(x)
            cws = cws_residual(prob, x, theta) <= CWS_FLAG_TOL
            rows.append(EnumRow(label, x, F, True, bool(cws)))
    zero = np.zeros(3)
    rows.append(EnumRow("0", zero, prob.evaluate(zero), True,
                        bool(cws_residual(prob, zero, theta) <= CWS_FLAG_TOL)))
    return rows


def enumerate_problem62(theta: float = 1e-6) -> list[EnumRow]:
    """Quadratic-minus-||Ax||_inf: dual vertices y = +/- e_j give x = A'y."""
    prob = build_eig_lp(_A61, alpha=1.0, p=math.inf)
    rows = []
    m = _A61.shape[0]
    for sgn in (1.0, -1.0):
        for j in range(m):
            y = np.zeros(m)
            y[j] = sgn
            x = _A61.T @ y
            label = "[" + "; ".join(f"{int(v):d}" for v in y) + "]"
            F = prob.evaluate(x)
            cws = cws_residual(prob, x, theta) <= CWS_FLAG_TOL
            rows.append(EnumRow(label, x, F, True, bool(cws)))
    return rows


# --------------------------------------------------------------------------
# closed-form diagnostics for the quadratic-minus-elliptic-norm problem
# F(x) = (alpha/2)||x||^2 - sqrt(x' C x)


def pca_closed_form(C, alpha: float = 1.0):
    """Global minimizer, optimal value, and the full critical set.

    Critical points are 0 and +/- (sqrt(l_k)/alpha) u_k for every positive
    eigenvalue l_k of C; the global minima are the +/- pair for l_1 with
    value -l_1/(2 alpha).
    """
    lam, U = sym_eig(C)
    if lam[-1] < -1e-8:
        raise ValueError("C must be positive semidefinite")
    lam = np.maximum(lam, 0.0)
    n = len(lam)
    critical = [np.zeros(n)]
    for k in range(n):
        if lam[k] > 0.0:
            xk = (math.sqrt(lam[k]) / alpha) * U[:, k]
            critical.extend([xk, -xk])
    if lam[0] == 0.0:
        return np.zeros(n), 0.0, critical
    x_opt = (math.sqrt(lam[0]) / alpha) * U[:, 0]
    return x_opt, -lam[0] / (2.0 * alpha), critical


def pca_gradient(C, alpha: float, x) -> np.ndarray:
    """alpha x - C x / sqrt(x' C x); at the kink x'Cx = 0 the zero
    subgradient of the norm is chosen, giving alpha x."""
    C = np.asarray(C, dtype=float)
    x = np.asarray(x, dtype=float)
    cx = C @ x
    s = float(np.dot(x, cx))
    if s <= 0.0:
        return alpha * x
    return alpha * x - cx / math.sqrt(s)


def pca_hessian(C, alpha: float, x) -> np.ndarray:
    """Hessian alpha I - C/s + (Cx)(Cx)'/s^3 with s = sqrt(x' C x)."""
    C = np.asarray(C, dtype=float)
    x = np.asarray(x, dtype=float)
    cx = C @ x
    s2 = float(np.dot(x, cx))
    if s2 <= 0.0:
        raise ValueError("Hessian undefined where x' C x = 0")
    s = math.sqrt(s2)
    return alpha * np.eye(len(x)) - C / s + np.outer(cx, cx) / s**3


def pca_hessian_bounds(C, varpi: float):
    """Eigenvalue bounds (sigma, tau) of the Hessian on the ball of radius
    varpi around the global minimizer (alpha = 1 analysis), plus the largest
    radius varpi_bar for which the local strong-convexity argument holds:

        sigma = 1 - l2/l1 - varpi (1 + 3/sqrt(l1)) - 3 varpi^2 / l1
        tau   = 1 + l1^2 (sqrt(l1) + varpi)^2 / (l1 - varpi sqrt(l1))^3
        varpi_bar = min( sqrt(l1) K(l2/l1), xi )

    where K is the Cardano root and xi solves sigma(xi) = 0 explicitly.
    """
    lam, _ = sym_eig(C)
    l1, l2 = float(lam[0]), float(lam[1])
    if not l1 > l2 > 0.0:
        raise ValueError("need lambda_1 > lambda_2 > 0")
    if varpi < 0.0:
        raise ValueError("varpi must be nonnegative")
    delta = 1.0 - l2 / l1
    sqrt_l1 = math.sqrt(l1)
    sigma = delta - varpi * (1.0 + 3.0 / sqrt_l1) - 3.0 * varpi**2 / l1
    tau = 1.0 + l1**2 * (sqrt_l1 + varpi) ** 2 / (l1 - varpi * sqrt_l1) ** 3
    cc = 1.0 + 3.0 / sqrt_l1
    xi = (l1 / 6.0) * (-cc + math.sqrt(cc * cc + 12.0 * delta / l1))
    varpi_bar = min(sqrt_l1 * cardano_K(l2 / l1), xi)
    return sigma, tau, varpi_bar


def hessian_containment(C, varpi: float, n_samples: int = 100,
                        seed: int = 0) -> float:
    """Sample points within varpi of the global minimizer and return the worst
    excursion of any Hessian eigenvalue outside [sigma, tau] (<= 0 is good)."""
    C = np.asarray(C, dtype=float)
    sigma, tau, _ = pca_hessian_bounds(C, varpi)
    x_bar, _, _ = pca_closed_form(C, 1.0)
    rng = np.random.default_rng(seed)
    n = C.shape[0]
    worst = -math.inf
    for _ in range(n_samples):
        v = rng.standard_normal(n)
        v *= varpi * rng.random() ** (1.0 / n) / np.linalg.norm(v)
        lam, _ = sym_eig(pca_hessian(C, 1.0, x_bar + v))
        worst = max(worst, sigma - float(lam[-1]), float(lam[0]) - tau)
    return worst
