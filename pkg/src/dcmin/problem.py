"""Difference-of-convex problem instances F(x) = f(x) + h(x) - g(x) + const.

f is smooth convex with known coordinate Lipschitz constants c_i, h is a
separable convex term (zero, weighted l1, or a box indicator), and g is a
convex - possibly nonsmooth and nonseparable - term subtracted off.  The
builders below assemble the five concrete applications the solvers and
benchmarks exercise:

* build_eig_lp       -- (alpha/2) x^T Q x - ||G x||_p          (p in {1,2,inf})
* build_approx_sparse -- least squares + rho(||x||_1 - top-s)
* build_approx_binary -- box-constrained least squares + rho(sqrt(n) - ||x||_2)
* build_glr          -- recovery through a rectifier: 0.5||max(0,Gx) - y||^2
* build_pca          -- (alpha/2)||x||^2 - sqrt(x^T C x)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    SparseColMatrix,
    gram_diagonal,
    matvec,
    rmatvec,
    spectral_norm_sq,
    sym_eig,
)

__all__ = [
    "Zero", "L1", "Box",
    "L1Compose", "LInfCompose", "L2Compose", "ReluCompose", "TopS", "ScaledNorm2",
    "QuadForm", "LeastSquares", "ReluLeastSquares",
    "DcProblem",
    "build_eig_lp", "build_approx_sparse", "build_approx_binary",
    "build_glr", "build_pca",
    "g_subgradient", "g_subgrad_interval", "rescale_solutions",
    "column", "evaluate_precise",
]

_ACT_TOL = 1e-8  # activity tolerance for kinks (|Ax|_j ~ 0, ties at the max, ...)


def column(M, j: int) -> np.ndarray:
    """Dense column j of a dense or column-sparse matrix."""
    if isinstance(M, SparseColMatrix):
        return M.column(j)
    return np.asarray(M, dtype=float)[:, j].copy()


# --------------------------------------------------------------------------
# separable convex parts h


@dataclass(frozen=True)
class Zero:
    kind = "zero"

    def value(self, x) -> float:
        return 0.0


@dataclass(frozen=True)
class L1:
    rho: float
    kind = "l1"

    def value(self, x) -> float:
        return self.rho * float(np.abs(x).sum())


@dataclass(frozen=True)
class Box:
    lo: float = -1.0
    hi: float = 1.0
    kind = "box"

    def value(self, x) -> float:
        # indicator; solvers never leave the box, so the value is always 0
        return 0.0

    def project(self, x) -> np.ndarray:
        return np.clip(x, self.lo, self.hi)


# --------------------------------------------------------------------------
# subtracted convex parts g


@dataclass(frozen=True, eq=False)
class L1Compose:
    A: object  # m x n matrix

    def value(self, x) -> float:
        return float(np.abs(matvec(self.A, x)).sum())


@dataclass(frozen=True, eq=False)
class LInfCompose:
    A: object

    def value(self, x) -> float:
        return float(np.abs(matvec(self.A, x)).max())


@dataclass(frozen=True, eq=False)
class L2Compose:
    B: object

    def value(self, x) -> float:
        return float(np.linalg.norm(matvec(self.B, x)))


@dataclass(frozen=True, eq=False)
class ReluCompose:
    A: object

    def value(self, x) -> float:
        return float(np.maximum(matvec(self.A, x), 0.0).sum())


@dataclass(frozen=True, eq=False)
class TopS:
    s: int
    rho: float

    def value(self, x) -> float:
        mags = np.sort(np.abs(x))[::-1]
        return self.rho * float(mags[: self.s].sum())


@dataclass(frozen=True, eq=False)
class ScaledNorm2:
    rho: float

    def value(self, x) -> float:
        return self.rho * float(np.linalg.norm(x))


# --------------------------------------------------------------------------
# smooth parts f


@dataclass(frozen=True, eq=False)
class QuadForm:
    """f(x) = (alpha/2) x^T Q x + <lin, x>, with Q = I when omitted."""

    alpha: float
    Q: object = None
    lin: object = None

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        qx = x if self.Q is None else matvec(self.Q, x)
        out = 0.5 * self.alpha * float(np.dot(x, qx))
        if self.lin is not None:
            out += float(np.dot(self.lin, x))
        return out

    def grad(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        qx = x if self.Q is None else matvec(self.Q, x)
        g = self.alpha * qx
        if self.lin is not None:
            g = g + self.lin
        return g


@dataclass(frozen=True, eq=False)
class LeastSquares:
    """f(x) = 0.5 ||G x - y||^2."""

    G: object
    y: object

    def value(self, x) -> float:
        r = matvec(self.G, x) - self.y
        return 0.5 * float(np.dot(r, r))

    def grad(self, x) -> np.ndarray:
        return rmatvec(self.G, matvec(self.G, x) - self.y)


@dataclass(frozen=True, eq=False)
class ReluLeastSquares:
    """f(x) = 0.5 ||max(0, G x)||^2 (convex; gradient uses the right derivative)."""

    G: object

    def value(self, x) -> float:
        s = np.maximum(matvec(self.G, x), 0.0)
        return 0.5 * float(np.dot(s, s))

    def grad(self, x) -> np.ndarray:
        return rmatvec(self.G, np.maximum(matvec(self.G, x), 0.0))


# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DcProblem:
    n: int
    f: object
    h: object
    g: object
    c: np.ndarray        # coordinate Lipschitz constants of grad f
    L: float             # global Lipschitz constant, L >= max(c)
    constant: float = 0.0

    def __post_init__(self):
        if np.any(self.c < 0.0):
            raise ValueError("coordinate Lipschitz constants must be >= 0")
        if self.L < np.max(self.c) - 1e-12:
            raise ValueError("global Lipschitz constant must dominate max(c)")

    # -- evaluation -------------------------------------------------------

    def f_value(self, x) -> float:
        return self.f.value(x)

    def h_value(self, x) -> float:
        return self.h.value(x)

    def g_value(self, x) -> float:
        return self.g.value(x)

    def evaluate(self, x) -> float:
        return self.f.value(x) + self.h.value(x) - self.g.value(x) + self.constant

    def grad_f(self, x) -> np.ndarray:
        return self.f.grad(x)

    def coord_grad_f(self, x, i: int, cache=None) -> float:
        """grad_i f(x); O(m) when the solver supplies its running cache."""
        f = self.f
        if isinstance(f, QuadForm):
            if f.Q is None:
                qx_i = x[i]
            elif cache is not None and "Qx" in cache:
                qx_i = cache["Qx"][i]
            else:
                qx_i = float(np.dot(column(f.Q, i), x))  # symmetric Q: row = col
            out = f.alpha * qx_i
            if f.lin is not None:
                out += f.lin[i]
            return float(out)
        if isinstance(f, LeastSquares):
            r = cache["r"] if cache is not None and "r" in cache \
                else matvec(f.G, x) - f.y
            return float(np.dot(column(f.G, i), r))
        if isinstance(f, ReluLeastSquares):
            gx = cache["Gx"] if cache is not None and "Gx" in cache \
                else matvec(f.G, x)
            return float(np.dot(column(f.G, i), np.maximum(gx, 0.0)))
        raise TypeError(f"unsupported smooth part {type(f).__name__}")

    # -- feasibility ------------------------------------------------------

    def feasible_interval(self, x, i: int) -> tuple[float, float]:
        """Admissible range for a step along coordinate i (from box h)."""
        if isinstance(self.h, Box):
            return (self.h.lo - x[i], self.h.hi - x[i])
        return (-math.inf, math.inf)

    def project(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if isinstance(self.h, Box):
            return self.h.project(x)
        return x.copy()


def _dense_long(M) -> np.ndarray:
    M = M.toarray() if isinstance(M, SparseColMatrix) else np.asarray(M, dtype=float)
    return M.astype(np.longdouble)


def evaluate_precise(problem: DcProblem, x) -> float:
    """F(x) with extended-precision reductions, rounded once to a double.

    Different solvers converging to the same stationary point produce
    iterates that differ in the last bits; plain double evaluation then
    returns values an ULP or two apart in an arbitrary direction.  Carrying
    the matrix products and sums in long double keeps the accumulated error
    below half an ULP of the final double, so genuinely equal objective
    values compare equal.  Used for reported final objectives only.
    """
    xl = np.asarray(x, dtype=np.longdouble)
    f = problem.f
    if isinstance(f, LeastSquares):
        r = _dense_long(f.G) @ xl - np.asarray(f.y, dtype=np.longdouble)
        fv = 0.5 * (r * r).sum()
    elif isinstance(f, ReluLeastSquares):
        s = np.maximum(_dense_long(f.G) @ xl, np.longdouble(0.0))
        fv = 0.5 * (s * s).sum()
    elif isinstance(f, QuadForm):
        qx = xl if f.Q is None else _dense_long(f.Q) @ xl
        fv = 0.5 * np.longdouble(f.alpha) * (xl * qx).sum()
        if f.lin is not None:
            fv = fv + (np.asarray(f.lin, dtype=np.longdouble) * xl).sum()
    else:
        fv = np.longdouble(f.value(x))

    h = problem.h
    if isinstance(h, L1):
        hv = np.longdouble(h.rho) * np.abs(xl).sum()
    else:
        hv = np.longdouble(0.0)

    g = problem.g
    if isinstance(g, L1Compose):
        gv = np.abs(_dense_long(g.A) @ xl).sum()
    elif isinstance(g, LInfCompose):
        gv = np.abs(_dense_long(g.A) @ xl).max()
    elif isinstance(g, ReluCompose):
        gv = np.maximum(_dense_long(g.A) @ xl, np.longdouble(0.0)).sum()
    elif isinstance(g, L2Compose):
        bx = _dense_long(g.B) @ xl
        gv = np.sqrt((bx * bx).sum())
    elif isinstance(g, ScaledNorm2):
        gv = np.longdouble(g.rho) * np.sqrt((xl * xl).sum())
    elif isinstance(g, TopS):
        mags = np.sort(np.abs(xl))[::-1]
        gv = np.longdouble(g.rho) * mags[: g.s].sum()
    else:
        gv = np.longdouble(g.value(x))
    return float(fv + hv - gv + np.longdouble(problem.constant))


# --------------------------------------------------------------------------
# subgradient oracles


def g_subgradient(problem: DcProblem, x) -> np.ndarray:
    """One fixed, deterministic element of the subdifferential of g at x.

    The selection at kinks is pinned (sign(0) = 0, lowest index on ties) so
    that SCA steps and the greedy rule are reproducible.
    """
    g = problem.g
    x = np.asarray(x, dtype=float)
    if isinstance(g, L1Compose):
        return rmatvec(g.A, np.sign(matvec(g.A, x)))
    if isinstance(g, ReluCompose):
        return rmatvec(g.A, (matvec(g.A, x) > 0.0).astype(float))
    if isinstance(g, LInfCompose):
        ax = matvec(g.A, x)
        j = int(np.argmax(np.abs(ax)))
        sign = 1.0 if ax[j] >= 0.0 else -1.0
        return sign * column_row(g.A, j)
    if isinstance(g, L2Compose):
        bx = matvec(g.B, x)
        norm = np.linalg.norm(bx)
        if norm == 0.0:
            return np.zeros(problem.n)
        return rmatvec(g.B, bx) / norm
    if isinstance(g, ScaledNorm2):
        norm = np.linalg.norm(x)
        if norm == 0.0:
            return np.zeros(problem.n)
        return g.rho * x / norm
    if isinstance(g, TopS):
        out = np.zeros(problem.n)
        # s largest magnitudes, ties resolved toward the lowest index
        order = np.lexsort((np.arange(problem.n), -np.abs(x)))
        top = order[: g.s]
        out[top] = g.rho * np.sign(x[top])
        return out
    raise TypeError(f"unsupported g part {type(g).__name__}")


def column_row(M, j: int) -> np.ndarray:
    """Dense row j of a dense or column-sparse matrix."""
    if isinstance(M, SparseColMatrix):
        out = np.zeros(M.n)
        for c in range(M.n):
            rows = M.col_rows[c]
            k = np.searchsorted(rows, j)
            if k < len(rows) and rows[k] == j:
                out[c] = M.col_vals[c][k]
        return out
    return np.asarray(M, dtype=float)[j, :].copy()


def g_subgrad_interval(problem: DcProblem, x) -> tuple[np.ndarray, np.ndarray]:
    """Per-coordinate bounds [lo_i, hi_i] on { v_i : v in subdiff g(x) }.

    Exact for separable-in-the-dual structures (l1/relu compositions, the
    Euclidean norm at 0); a coordinatewise relaxation of the coupled sets
    (l_inf composition, top-s).  Used by the stationarity residuals to
    minimize over the subgradient choice instead of pinning one element.
    """
    g = problem.g
    x = np.asarray(x, dtype=float)
    n = problem.n
    if isinstance(g, (L1Compose, ReluCompose)):
        ax = matvec(g.A, x)
        tol = _ACT_TOL * (1.0 + float(np.abs(ax).max(initial=0.0)))
        active = np.abs(ax) <= tol
        if isinstance(g, L1Compose):
            fixed_w = np.sign(ax) * ~active
            free_lo, free_hi = -1.0, 1.0
        else:
            fixed_w = (ax > tol).astype(float)
            free_lo, free_hi = 0.0, 1.0
        base = rmatvec(g.A, fixed_w)
        lo = base.copy()
        hi = base.copy()
        if np.any(active):
            act = np.flatnonzero(active)
            for j in act:
                row = column_row(g.A, j)
                lo += np.minimum(free_lo * row, free_hi * row)
                hi += np.maximum(free_lo * row, free_hi * row)
        return lo, hi
    if isinstance(g, LInfCompose):
        ax = matvec(g.A, x)
        mags = np.abs(ax)
        mmax = float(mags.max())
        tol = _ACT_TOL * (1.0 + mmax)
        lo = np.full(n, math.inf)
        hi = np.full(n, -math.inf)
        for j in np.flatnonzero(mags >= mmax - tol):
            row = column_row(g.A, j)
            verts = [row, -row] if mags[j] <= tol else [np.sign(ax[j]) * row]
            for v in verts:
                lo = np.minimum(lo, v)
                hi = np.maximum(hi, v)
        return lo, hi
    if isinstance(g, L2Compose):
        bx = matvec(g.B, x)
        norm = float(np.linalg.norm(bx))
        if norm <= _ACT_TOL:
            # ball of subgradients; relax coordinatewise to column-norm boxes
            r = np.sqrt(gram_diagonal(g.B))
            return -r, r
        v = rmatvec(g.B, bx) / norm
        return v.copy(), v.copy()
    if isinstance(g, ScaledNorm2):
        norm = float(np.linalg.norm(x))
        if norm <= _ACT_TOL:
            r = np.full(n, g.rho)
            return -r, r
        v = g.rho * x / norm
        return v.copy(), v.copy()
    if isinstance(g, TopS):
        mags = np.abs(x)
        order = np.sort(mags)[::-1]
        kth = order[g.s - 1]
        tol = _ACT_TOL * (1.0 + float(order[0]))
        lo = np.zeros(n)
        hi = np.zeros(n)
        inside = mags > kth + tol
        border = np.abs(mags - kth) <= tol
        lo[inside] = hi[inside] = g.rho * np.sign(x[inside])
        # borderline coordinates may or may not enter the top-s set
        for i in np.flatnonzero(border):
            if mags[i] <= tol:  # |x_i| ~ 0: any sign, possibly excluded
                lo[i], hi[i] = -g.rho, g.rho
            elif x[i] > 0:
                lo[i], hi[i] = 0.0, g.rho
            else:
                lo[i], hi[i] = -g.rho, 0.0
        return lo, hi
    raise TypeError(f"unsupported g part {type(g).__name__}")


# --------------------------------------------------------------------------
# builders


def _lipschitz(G, c) -> float:
    # 1.01 safety factor on the power-iteration estimate, floored by max(c)
    return max(1.01 * spectral_norm_sq(G), float(np.max(c)))


def _ncols(M) -> int:
    return M.n if isinstance(M, SparseColMatrix) else np.asarray(M).shape[1]


def build_eig_lp(G, Q=None, alpha: float = 1.0, p=1) -> DcProblem:
    """(alpha/2) x^T Q x - ||G x||_p with p in {1, 2, inf}; Q = I by default."""
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    n = _ncols(G)
    if Q is None:
        c = alpha * np.ones(n)
        L = alpha
    else:
        Q = np.asarray(Q, dtype=float)
        lam, _ = sym_eig(Q)
        if lam[-1] <= 1e-12 * max(1.0, lam[0]):
            raise ValueError("Q must be positive definite")
        c = alpha * np.diag(Q).copy()
        L = alpha * float(lam[0])
    if p == 1:
        g = L1Compose(G)
    elif p == 2:
        g = L2Compose(G)
    elif p in (math.inf, "inf"):
        g = LInfCompose(G)
    else:
        raise ValueError("p must be 1, 2 or inf")
    return DcProblem(n=n, f=QuadForm(alpha, Q), h=Zero(), g=g, c=c, L=float(L))


def build_approx_sparse(G, y, rho: float, s: int) -> DcProblem:
    """0.5||Gx - y||^2 + rho ||x||_1 - rho * (top-s magnitude sum)."""
    n = _ncols(G)
    if not 1 <= s <= n:
        raise ValueError(f"s must lie in [1, {n}]")
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    y = np.asarray(y, dtype=float)
    c = gram_diagonal(G)
    return DcProblem(n=n, f=LeastSquares(G, y), h=L1(rho), g=TopS(s, rho),
                     c=c, L=_lipschitz(G, c))


def build_approx_binary(G, y, rho: float) -> DcProblem:
    """Box[-1,1]-constrained 0.5||Gx - y||^2 + rho (sqrt(n) - ||x||_2)."""
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    n = _ncols(G)
    y = np.asarray(y, dtype=float)
    c = gram_diagonal(G)
    return DcProblem(n=n, f=LeastSquares(G, y), h=Box(-1.0, 1.0),
                     g=ScaledNorm2(rho), c=c, L=_lipschitz(G, c),
                     constant=rho * math.sqrt(n))


def build_glr(G, y) -> DcProblem:
    """0.5||max(0, Gx) - y||^2 for y >= 0, written as a DC program:

    f = 0.5||max(0,Gx)||^2, g = ||max(0, diag(y) G x)||_1, const = 0.5||y||^2.
    """
    y = np.asarray(y, dtype=float)
    if np.any(y < 0.0):
        raise ValueError("observations must be elementwise nonnegative")
    n = _ncols(G)
    if isinstance(G, SparseColMatrix):
        A = G.scale_rows(y)
    else:
        A = np.asarray(G, dtype=float) * y[:, None]
    c = gram_diagonal(G)
    return DcProblem(n=n, f=ReluLeastSquares(G), h=Zero(), g=ReluCompose(A),
                     c=c, L=_lipschitz(G, c), constant=0.5 * float(np.dot(y, y)))


def build_pca(C, alpha: float = 1.0) -> DcProblem:
    """(alpha/2)||x||^2 - sqrt(x^T C x) for symmetric PSD C.

    C is factored once as B^T B with B = sqrt(Lambda) U^T, so g reuses the
    generic Euclidean-norm composition machinery.
    """
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    C = np.asarray(C, dtype=float)
    lam, U = sym_eig(C)
    if lam[-1] < -1e-8:
        raise ValueError("C must be positive semidefinite")
    lam = np.maximum(lam, 0.0)
    B = np.sqrt(lam)[:, None] * U.T
    n = C.shape[0]
    return DcProblem(n=n, f=QuadForm(alpha), h=Zero(), g=L2Compose(B),
                     c=alpha * np.ones(n), L=float(alpha))


def rescale_solutions(x_bar, G, Q=None, alpha: float = 1.0, p=1):
    """Rescale a stationary point of the unconstrained form onto the two
    constrained formulations: v with v^T Q v = 1 and z with ||G z||_p = 1.
    """
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    x = np.asarray(x_bar, dtype=float)
    if not np.any(x):
        raise ValueError("x_bar must be nonzero")
    qx = x if Q is None else matvec(Q, x)
    v = x / math.sqrt(float(np.dot(x, qx)))
    gx = matvec(G, x)
    if p == 1:
        norm = float(np.abs(gx).sum())
    elif p == 2:
        norm = float(np.linalg.norm(gx))
    elif p in (math.inf, "inf"):
        norm = float(np.abs(gx).max())
    else:
        raise ValueError("p must be 1, 2 or inf")
    if norm == 0.0:
        raise ValueError("G x_bar must be nonzero")
    return v, x / norm
