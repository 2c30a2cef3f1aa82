"""Exact global solvers for the 1-D coordinate subproblem.

Each operator minimizes a function of the form

    p(eta) = (a/2) eta^2 + b eta + [separable convex term] - [nonconvex term]

over a closed feasible interval, by enumerating a finite candidate set
(stationary points of every smooth piece, the kinks between pieces, eta = 0,
and the interval endpoints) and evaluating p exactly at each candidate.
Since the candidate set provably contains a global minimizer, the argmin over
candidates is the exact answer, not an approximation.

Tie-breaking: among candidates whose objective values agree to 1e-14 the one
with the smallest |eta| wins (then the smallest eta).  This makes the
operators deterministic and biases them toward "no movement" at stationarity,
which is exactly what the stationarity residuals need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import real_roots

__all__ = [
    "ProxResult",
    "prox_l1_compose",
    "prox_linf_compose",
    "prox_relu_compose",
    "prox_l2_compose",
    "prox_top_s",
    "prox_convex_sca",
]

_TIE_TOL = 1e-14


@dataclass(frozen=True)
class ProxResult:
    eta: float
    value: float
    candidates_evaluated: int


def _check_coercive(a: float, lo: float, hi: float) -> None:
    if lo > hi:
        raise ValueError(f"empty feasible interval [{lo}, {hi}]")
    if a < 0.0:
        raise ValueError("quadratic coefficient a must be >= 0")
    if a == 0.0 and not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("a = 0 requires a bounded feasible interval")


def _assemble(interior: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Clip interior candidates into [lo, hi]; always add 0 and finite endpoints."""
    cands = [np.clip(np.append(interior, 0.0), lo, hi)]
    ends = [e for e in (lo, hi) if math.isfinite(e)]
    if ends:
        cands.append(np.asarray(ends))
    return np.concatenate(cands)


def _select(etas: np.ndarray, values: np.ndarray) -> ProxResult:
    vmin = values.min()
    close = np.flatnonzero(values <= vmin + _TIE_TOL)
    e = etas[close]
    best = close[np.lexsort((e, np.abs(e)))[0]]
    return ProxResult(float(etas[best]), float(values[best]), len(etas))


# --------------------------------------------------------------------------
# weighted-l1 plumbing shared by the l1 and relu operators
#
# For rows with g_j != 0, sum_j |g_j eta + d_j| = sum_j w_j |eta - t_j| with
# w_j = |g_j| and t_j = -d_j / g_j.  With the kinks sorted, prefix sums give
# the exact value at any eta in O(log m), and the slope of the l1 part on the
# interval past the k-th kink is 2*cumw[k] - W.


def _l1_parts(g, d):
    g = np.asarray(g, dtype=float)
    d = np.asarray(d, dtype=float)
    if g.shape != d.shape:
        raise ValueError("g and d must have equal length")
    nz = g != 0.0
    const = float(np.abs(d[~nz]).sum())
    w = np.abs(g[nz])
    t = -d[nz] / g[nz]
    order = np.argsort(t)
    t = t[order]
    w = w[order]
    cumw = np.concatenate(([0.0], np.cumsum(w)))
    cumwt = np.concatenate(([0.0], np.cumsum(w * t)))
    return t, cumw, cumwt, const


def _l1_eval(etas: np.ndarray, parts) -> np.ndarray:
    t, cumw, cumwt, const = parts
    k = np.searchsorted(t, etas, side="left")
    W, T = cumw[-1], cumwt[-1]
    return etas * (2.0 * cumw[k] - W) - (2.0 * cumwt[k] - T) + const


def _l1_stationary(a: float, b: float, parts, weight: float) -> np.ndarray:
    """Stationary point of each linear piece: a*eta + b - weight*slope_k = 0."""
    if a <= 0.0:
        return np.array([])
    t, cumw, _, _ = parts
    slopes = 2.0 * cumw - cumw[-1]
    return np.concatenate(((weight * slopes - b) / a, t))


def prox_l1_compose(a, b, g, d, lo=-math.inf, hi=math.inf) -> ProxResult:
    """Globally minimize (a/2) eta^2 + b eta - ||g eta + d||_1 over [lo, hi]."""
    _check_coercive(a, lo, hi)
    parts = _l1_parts(g, d)
    cands = _assemble(_l1_stationary(a, b, parts, 1.0), lo, hi)
    vals = 0.5 * a * cands**2 + b * cands - _l1_eval(cands, parts)
    return _select(cands, vals)


def prox_relu_compose(a, b, g, d, lo=-math.inf, hi=math.inf) -> ProxResult:
    """Globally minimize (a/2) eta^2 + b eta - sum_j max(0, g_j eta + d_j).

    Uses max(0, z) = (z + |z|)/2 to reduce to the weighted-l1 machinery with
    an adjusted linear coefficient and half weights; the reported value is for
    the original relu objective.
    """
    _check_coercive(a, lo, hi)
    g = np.asarray(g, dtype=float)
    d = np.asarray(d, dtype=float)
    parts = _l1_parts(g, d)
    b2 = b - 0.5 * float(g.sum())
    half_sd = 0.5 * float(d.sum())
    cands = _assemble(_l1_stationary(a, b2, parts, 0.5), lo, hi)
    vals = 0.5 * a * cands**2 + b2 * cands - half_sd - 0.5 * _l1_eval(cands, parts)
    return _select(cands, vals)


def prox_linf_compose(a, b, g, d, lo=-math.inf, hi=math.inf) -> ProxResult:
    """Globally minimize (a/2) eta^2 + b eta - ||g eta + d||_inf over [lo, hi].

    The max-norm is a max of 2m affine functions of eta; each contributes one
    candidate where the corresponding quadratic piece is stationary.
    """
    _check_coercive(a, lo, hi)
    g = np.asarray(g, dtype=float)
    d = np.asarray(d, dtype=float)
    if g.size == 0:
        raise ValueError("l_inf composition needs at least one row")
    gbar = np.concatenate((g, -g))
    dbar = np.concatenate((d, -d))
    interior = (-b - gbar) / a if a > 0.0 else np.array([])
    cands = _assemble(interior, lo, hi)
    env = np.max(np.multiply.outer(gbar, cands) + dbar[:, None], axis=0)
    vals = 0.5 * a * cands**2 + b * cands - env
    return _select(cands, vals)


def prox_l2_compose(a, b, g, d, lo=-math.inf, hi=math.inf) -> ProxResult:
    """Globally minimize (a/2) eta^2 + b eta - ||g eta + d||_2 over [lo, hi].

    Where the norm is differentiable, stationarity squares to the quartic

        (A eta^2 + 2 B eta + C) (a eta + b)^2 - (A eta + B)^2 = 0

    with A = <g,g>, B = <g,d>, C = <d,d>.  All real roots are candidates;
    spurious roots introduced by squaring are harmless because every candidate
    is evaluated exactly.  When d is (anti)parallel to g the norm has a kink
    at eta0 = -B/A, which is appended as an extra candidate.
    """
    _check_coercive(a, lo, hi)
    g = np.asarray(g, dtype=float)
    d = np.asarray(d, dtype=float)
    if g.shape != d.shape:
        raise ValueError("g and d must have equal length")
    A = float(np.dot(g, g))
    B = float(np.dot(g, d))
    C = float(np.dot(d, d))
    if A == 0.0:
        interior = np.array([-b / a]) if a > 0.0 else np.array([])
        cands = _assemble(interior, lo, hi)
        vals = 0.5 * a * cands**2 + b * cands - math.sqrt(C)
        return _select(cands, vals)

    a2, ab2, b2 = a * a, 2.0 * a * b, b * b
    quartic = [A * a2,
               A * ab2 + 2.0 * B * a2,
               A * b2 + 2.0 * B * ab2 + C * a2 - A * A,
               2.0 * B * b2 + C * ab2 - 2.0 * A * B,
               C * b2 - B * B]
    interior = real_roots(quartic)
    norm_prod = math.sqrt(A) * math.sqrt(C)
    if norm_prod - abs(B) <= 1e-12 * norm_prod:
        interior = np.append(interior, -B / A)  # g eta + d = 0 kink
    cands = _assemble(interior, lo, hi)
    radicand = np.maximum(A * cands**2 + 2.0 * B * cands + C, 0.0)
    vals = 0.5 * a * cands**2 + b * cands - np.sqrt(radicand)
    return _select(cands, vals)


def _psi_root(a: float, beta: float, rho: float, R2: float,
              ulo: float, uhi: float, s_hi: int) -> float:
    """One root of psi(u) = a u + beta - rho u / sqrt(u^2 + R2) on a monotone
    bracket [ulo, uhi] where sign(psi(uhi)) = s_hi; Newton with a bisection
    safeguard."""
    u = 0.5 * (ulo + uhi)
    for _ in range(200):
        s = math.sqrt(u * u + R2)
        f = a * u + beta - rho * u / s
        if f == 0.0:
            return u
        if (f > 0.0) == (s_hi > 0):
            uhi = u
        else:
            ulo = u
        d = a - rho * R2 / (s * s * s)
        if d > 0.0:
            un = u - f / d
            if ulo < un < uhi:
                if abs(un - u) <= 1e-15 * (1.0 + abs(un)):
                    return un
                u = un
                continue
        un = 0.5 * (ulo + uhi)
        if abs(un - u) <= 1e-15 * (1.0 + abs(un)):
            return un
        u = un
    return u


def _prox_scaled_l2(a: float, b: float, xi: float, rest: float, rho: float,
                    lo: float, hi: float) -> float:
    """Scalar fast path for (a/2) eta^2 + b eta - rho ||x + eta e_i||: the
    norm depends on eta only through u = x_i + eta and the fixed remainder
    `rest` = ||x - x_i e_i||.  For rest > 0 the objective is smooth with
    derivative psi(u) = a u + (b - a x_i) - rho u / sqrt(u^2 + rest^2), which
    is monotone outside [-u*, u*] with u* from (u^2 + rest^2)^{3/2} =
    rho rest^2 / a, so all (at most 3) stationary points come from bracketed
    root-finding; rest = 0 degenerates to a shifted absolute value with
    closed-form piece minimizers.  Candidates are evaluated exactly with the
    same tie rule as the array operators."""
    beta = b - a * xi
    cands = []
    if rest == 0.0:
        # (a/2) eta^2 + b eta - rho |xi + eta|: per-piece stationary points
        cands.extend(((rho - b) / a, (-rho - b) / a, -xi))
    else:
        R2 = rest * rest
        thr = (rho * R2 / a) ** (2.0 / 3.0) - R2
        U = (abs(beta) + rho) / a + 1.0
        if thr <= 0.0:
            edges = [-U, U]
        else:
            ustar = math.sqrt(thr)
            U += ustar
            edges = [-U, -ustar, ustar, U]
        vals = [a * u + beta - rho * u / math.hypot(u, rest) for u in edges]
        for k in range(len(edges) - 1):
            if (vals[k] > 0.0) != (vals[k + 1] > 0.0) or vals[k] == 0.0:
                u = _psi_root(a, beta, rho, R2, edges[k], edges[k + 1],
                              1 if vals[k + 1] > 0.0 else -1)
                cands.append(u - xi)
    cands = [min(max(e, lo), hi) for e in cands]
    cands.append(min(max(0.0, lo), hi))
    if math.isfinite(lo):
        cands.append(lo)
    if math.isfinite(hi):
        cands.append(hi)
    best_eta = 0.0
    best_val = math.inf
    for e in cands:
        v = 0.5 * a * e * e + b * e - rho * math.hypot(xi + e, rest)
        if v < best_val - _TIE_TOL:
            best_eta, best_val = e, v
        elif v <= best_val + _TIE_TOL and (
                abs(e) < abs(best_eta) or (abs(e) == abs(best_eta) and e < best_eta)):
            best_eta, best_val = e, min(best_val, v)
    return best_eta


def _prox_top_s_scalar(a: float, b: float, xi: float, top_s_sum: float,
                       kth: float, rho: float, lo: float,
                       hi: float) -> tuple[float, float]:
    """Scalar fast path for the top-s subproblem along one coordinate.

    `top_s_sum` and `kth` are the sum of the s largest magnitudes and the
    s-th largest magnitude among the *other* coordinates (requires s <= n-1).
    Returns (eta, top-s magnitude sum after the step); same candidate set and
    tie rule as prox_top_s.
    """
    cands = [min(max(e, lo), hi)
             for e in (-b / a, -xi, (-rho - b) / a, (rho - b) / a, 0.0)]
    if math.isfinite(lo):
        cands.append(lo)
    if math.isfinite(hi):
        cands.append(hi)
    best_eta = 0.0
    best_val = math.inf
    best_top = top_s_sum
    for e in cands:
        v = abs(xi + e)
        top = top_s_sum - kth + v if v >= kth else top_s_sum
        p = 0.5 * a * e * e + b * e + rho * v - rho * top
        if p < best_val - _TIE_TOL:
            best_eta, best_val, best_top = e, p, top
        elif p <= best_val + _TIE_TOL and (
                abs(e) < abs(best_eta) or (abs(e) == abs(best_eta) and e < best_eta)):
            best_eta, best_val, best_top = e, min(best_val, p), top
    return best_eta, best_top


def prox_top_s(a, b, x, i, s, rho, lo=-math.inf, hi=math.inf) -> ProxResult:
    """Globally minimize the top-s penalized subproblem along coordinate i:

        p(eta) = (a/2) eta^2 + b eta + rho |x_i + eta|
                 - rho * (sum of the s largest |.| entries of x + eta e_i).

    There are four structural breakpoints {-b/a, -x_i, (-rho-b)/a, (rho-b)/a};
    each candidate is evaluated exactly against the re-sorted magnitudes.
    """
    _check_coercive(a, lo, hi)
    x = np.asarray(x, dtype=float)
    n = x.size
    if not 1 <= s <= n:
        raise ValueError(f"s must lie in [1, {n}], got {s}")
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    if a > 0.0:
        interior = np.array([-b / a, -x[i], (-rho - b) / a, (rho - b) / a])
    else:
        interior = np.array([-x[i]])
    cands = _assemble(interior, lo, hi)

    # the top-s sum after the step depends on the other entries only through
    # the sum of their s largest magnitudes and the s-th largest magnitude,
    # both obtained from one partial partition (x_i masked out with -1)
    mags = np.abs(x)
    mags[i] = -1.0
    v = np.abs(x[i] + cands)
    if s <= n - 1:
        part = np.partition(mags, n - 1 - s)
        top_s_sum = float(part[n - s:].sum())      # s largest of the others
        kth = float(part[n - s:].min())            # s-th largest of the others
        top = np.where(v >= kth, top_s_sum - kth + v, top_s_sum)
    else:
        top = (float(mags[:i].sum() + mags[i + 1:].sum())) + v
    vals = 0.5 * a * cands**2 + b * cands + rho * v - rho * top
    return _select(cands, vals)


def prox_convex_sca(a, b_eff, h_kind="zero", x_i=0.0, rho=0.0,
                    lo=-math.inf, hi=math.inf) -> ProxResult:
    """Closed-form minimizer of the convex surrogate subproblem

        P(eta) = (a/2) eta^2 + b_eff eta + h(x_i + eta) - h(x_i)

    where b_eff already folds in the linearization of g.  h_kind selects the
    separable term: "zero", "l1" (weight rho), or "box" (indicator carried by
    the [lo, hi] interval).
    """
    if a <= 0.0:
        raise ValueError("convex subproblem needs a > 0")
    if h_kind == "l1":
        w = x_i - b_eff / a
        w_star = math.copysign(max(abs(w) - rho / a, 0.0), w)
        eta = min(max(w_star - x_i, lo), hi)
        value = 0.5 * a * eta * eta + b_eff * eta + rho * (abs(x_i + eta) - abs(x_i))
    elif h_kind in ("zero", "box"):
        eta = min(max(-b_eff / a, lo), hi)
        value = 0.5 * a * eta * eta + b_eff * eta
    else:
        raise ValueError(f"unknown h_kind {h_kind!r}")
    return ProxResult(float(eta), float(value), 1)
