"""Small linear-algebra kernels: sparse columns, Jacobi eigensolver, root finding.

Everything here is sized for desk-scale experiments (matrices up to a few
thousand rows, symmetric eigenproblems up to 64x64).  numpy arrays are the
dense carriers; :class:`SparseColMatrix` adds a column-oriented sparse format
with cheap single-column extraction, which is what coordinate updates need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DimensionError",
    "SparseColMatrix",
    "matvec",
    "rmatvec",
    "gram_diagonal",
    "spectral_norm_sq",
    "sym_eig",
    "real_roots",
    "cardano_K",
    "read_matrix",
    "write_matrix",
]


class DimensionError(ValueError):
    """Shapes do not line up."""


def _as_vector(v, n: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise DimensionError(f"expected length {n}, got {v.shape[0]}")
    return v


@dataclass(frozen=True)
class SparseColMatrix:
    """Column-sparse matrix: per column, strictly increasing row indices + values.

    Immutable after construction.  Column extraction (`column(j)`) is O(nnz_j),
    which keeps coordinate updates cheap on sparse benchmark data.
    """

    m: int
    n: int
    col_rows: tuple  # tuple of int ndarrays, strictly increasing per column
    col_vals: tuple  # tuple of float ndarrays, nonzero entries

    def __post_init__(self):
        if len(self.col_rows) != self.n or len(self.col_vals) != self.n:
            raise DimensionError("column count mismatch")
        for rows, vals in zip(self.col_rows, self.col_vals):
            if len(rows) != len(vals):
                raise DimensionError("row/value length mismatch in a column")
            if len(rows) and (rows[0] < 0 or rows[-1] >= self.m):
                raise DimensionError("row index out of range")
            if np.any(np.diff(rows) <= 0):
                raise ValueError("row indices must be strictly increasing")
        # flattened copies so matvec/rmatvec run as single vectorized passes
        counts = np.array([len(r) for r in self.col_rows], dtype=np.intp)
        flat_rows = (np.concatenate(self.col_rows).astype(np.intp)
                     if self.n else np.empty(0, dtype=np.intp))
        flat_vals = (np.concatenate(self.col_vals).astype(float)
                     if self.n else np.empty(0))
        object.__setattr__(self, "_flat_rows", flat_rows)
        object.__setattr__(self, "_flat_vals", flat_vals)
        object.__setattr__(self, "_flat_cols", np.repeat(np.arange(self.n, dtype=np.intp), counts))
        object.__setattr__(self, "_counts", counts)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.m, self.n)

    @property
    def nnz(self) -> int:
        return sum(len(r) for r in self.col_rows)

    @classmethod
    def from_dense(cls, M) -> "SparseColMatrix":
        M = np.asarray(M, dtype=float)
        m, n = M.shape
        col_rows, col_vals = [], []
        for j in range(n):
            rows = np.flatnonzero(M[:, j])
            col_rows.append(rows.astype(np.intp))
            col_vals.append(M[rows, j].copy())
        return cls(m, n, tuple(col_rows), tuple(col_vals))

    @classmethod
    def from_triplets(cls, m: int, n: int, rows, cols, vals) -> "SparseColMatrix":
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        vals = np.asarray(vals, dtype=float)
        col_rows, col_vals = [], []
        for j in range(n):
            sel = np.flatnonzero(cols == j)
            order = np.argsort(rows[sel], kind="stable")
            r = rows[sel][order]
            v = vals[sel][order]
            keep = v != 0.0
            col_rows.append(r[keep])
            col_vals.append(v[keep])
        return cls(m, n, tuple(col_rows), tuple(col_vals))

    def column(self, j: int) -> np.ndarray:
        """Dense copy of column j."""
        out = np.zeros(self.m)
        out[self.col_rows[j]] = self.col_vals[j]
        return out

    def toarray(self) -> np.ndarray:
        out = np.zeros((self.m, self.n))
        for j in range(self.n):
            out[self.col_rows[j], j] = self.col_vals[j]
        return out

    def scale_rows(self, w) -> "SparseColMatrix":
        """diag(w) @ self, keeping sparsity (zero weights drop entries)."""
        w = _as_vector(w, self.m)
        col_rows, col_vals = [], []
        for rows, vals in zip(self.col_rows, self.col_vals):
            scaled = vals * w[rows]
            keep = scaled != 0.0
            col_rows.append(rows[keep])
            col_vals.append(scaled[keep])
        return SparseColMatrix(self.m, self.n, tuple(col_rows), tuple(col_vals))


def matvec(M, v) -> np.ndarray:
    """M @ v for dense arrays or SparseColMatrix."""
    if isinstance(M, SparseColMatrix):
        v = _as_vector(v, M.n)
        return np.bincount(M._flat_rows, weights=M._flat_vals * v[M._flat_cols],
                           minlength=M.m)
    M = np.asarray(M, dtype=float)
    v = _as_vector(v, M.shape[1])
    return M @ v


def rmatvec(M, v) -> np.ndarray:
    """M.T @ v for dense arrays or SparseColMatrix."""
    if isinstance(M, SparseColMatrix):
        v = _as_vector(v, M.m)
        return np.bincount(M._flat_cols, weights=M._flat_vals * v[M._flat_rows],
                           minlength=M.n)
    M = np.asarray(M, dtype=float)
    v = _as_vector(v, M.shape[0])
    return M.T @ v


def gram_diagonal(G) -> np.ndarray:
    """diag(G^T G): squared Euclidean norms of the columns."""
    if isinstance(G, SparseColMatrix):
        return np.bincount(G._flat_cols, weights=G._flat_vals**2, minlength=G.n)
    G = np.asarray(G, dtype=float)
    return np.einsum("ij,ij->j", G, G)


def spectral_norm_sq(G, tol: float = 1e-10, max_iter: int = 1000) -> float:
    """Largest eigenvalue of G^T G by power iteration (deterministic start).

    Returns a Rayleigh-quotient estimate; callers that need a valid Lipschitz
    upper bound should apply their own safety factor on top (the problem
    builders use 1.01).
    """
    n = G.n if isinstance(G, SparseColMatrix) else np.asarray(G).shape[1]
    v = np.random.default_rng(0).standard_normal(n)
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return 0.0
    v /= nv
    lam = 0.0
    for _ in range(max_iter):
        w = rmatvec(G, matvec(G, v))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        lam_new = float(np.dot(v, w))
        v = w / nw
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1.0):
            lam = lam_new
            break
        lam = lam_new
    return lam


def sym_eig(S) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a small symmetric matrix by cyclic Jacobi sweeps.

    Returns (eigenvalues descending, U with unit-norm eigenvector columns).
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DimensionError("sym_eig expects a square matrix")
    n = S.shape[0]
    if n > 64:
        raise DimensionError("sym_eig is sized for n <= 64")
    scale = np.max(np.abs(S)) if n else 0.0
    if scale and np.max(np.abs(S - S.T)) > 1e-10 * scale:
        raise ValueError("matrix is not symmetric")

    A = 0.5 * (S + S.T)  # kill rounding-level asymmetry
    U = np.eye(n)
    if n <= 1 or scale == 0.0:
        lam = np.diag(A).copy()
        order = np.argsort(-lam, kind="stable")
        return lam[order], U[:, order]

    for _ in range(100):  # sweeps; Jacobi converges quadratically
        off = 0.0
        for p in range(n - 1):
            row = np.abs(A[p, p + 1:])
            if row.size:
                off = max(off, float(row.max()))
        if off <= 1e-14 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-16 * scale:
                    continue
                # classical 2x2 rotation annihilating A[p, q]
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(1.0, theta))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                rp = A[:, p].copy()
                rq = A[:, q].copy()
                A[:, p] = c * rp - s * rq
                A[:, q] = s * rp + c * rq
                rp = A[p, :].copy()
                rq = A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                up = U[:, p].copy()
                uq = U[:, q].copy()
                U[:, p] = c * up - s * uq
                U[:, q] = s * up + c * uq

    lam = np.diag(A).copy()
    order = np.argsort(-lam, kind="stable")
    return lam[order], U[:, order]


def _horner(c, x):
    p = c[0]
    for v in c[1:]:
        p = p * x + v
    return p


def _polish_newton(root: float, c, dc) -> float:
    """A few Newton steps on p(x) = sum c_k x^(deg-k)."""
    x = root
    for _ in range(6):
        dpx = _horner(dc, x)
        if dpx == 0.0:
            break
        step = _horner(c, x) / dpx
        x_new = x - step
        if not math.isfinite(x_new):
            break
        x = x_new
        if abs(step) <= 1e-16 * max(1.0, abs(x)):
            break
    return x


def real_roots(coeffs) -> np.ndarray:
    """All real roots of a real polynomial of degree <= 4, sorted ascending.

    Coefficients are highest-degree first.  Roots are found by Durand-Kerner
    iteration in complex arithmetic (uniform path for degrees 2-4), filtered
    to near-real values, Newton-polished, and merged when closer than
    1e-7 * scale (a double root is only locatable to ~sqrt(eps) in double
    precision, so copies of a multiple root land ~1e-8 apart).
    """
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("coefficients must be a nonempty 1-D sequence")
    if not np.all(np.isfinite(c)):
        raise ValueError("non-finite coefficient")
    cmax = np.max(np.abs(c))
    if cmax == 0.0:
        raise ValueError("zero polynomial has no well-defined root set")
    # trim (numerically) vanishing leading coefficients, then normalize
    nz = np.flatnonzero(np.abs(c) > 1e-14 * cmax)
    c = c[nz[0]:]
    c = c / np.max(np.abs(c))
    deg = c.size - 1
    if deg > 4:
        raise ValueError("degree must be <= 4")
    if deg == 0:
        return np.array([])
    if deg == 1:
        return np.array([-c[1] / c[0]])

    mon = [float(v) for v in c / c[0]]
    # Durand-Kerner with the usual (0.4 + 0.9i)^k seeds; scalar complex
    # arithmetic with in-place (sequential) updates converges in a few sweeps
    z = [(0.4 + 0.9j) ** k for k in range(deg)]
    for _ in range(200):
        max_delta = 0.0
        for k in range(deg):
            zk = z[k]
            denom = 1.0 + 0.0j
            for j in range(deg):
                if j != k:
                    denom *= zk - z[j]
            if denom == 0.0:
                denom = 1e-30
            delta = _horner(mon, zk) / denom
            z[k] = zk - delta
            max_delta = max(max_delta, abs(delta))
        if max_delta <= 1e-14 * max(1.0, max(abs(v) for v in z)):
            break

    cl = [float(v) for v in c]
    dc = [cl[k] * (deg - k) for k in range(deg)]
    roots = []
    for zk in z:
        if abs(zk.imag) <= 1e-9 * max(1.0, abs(zk)):
            roots.append(_polish_newton(zk.real, cl, dc))
    if not roots:
        return np.array([])
    roots = np.sort(np.asarray(roots))
    scale = max(1.0, float(np.max(np.abs(roots))))
    merged = [roots[0]]
    for r in roots[1:]:
        if r - merged[-1] > 1e-7 * scale:
            merged.append(r)
    return np.asarray(merged)


def cardano_K(phi: float) -> float:
    """Closed-form positive root t of 1 - t - (1 + t)^3 (1 - phi) = 0.

    Valid for 0 < phi < 1; by Cardano's formula on the depressed cubic the
    root is -1 + cbrt(q + r) + cbrt(q - r) with q = 1/(1-phi) and
    r = sqrt(q^2 + q^3/27).
    """
    if not (0.0 < phi < 1.0):
        raise ValueError("phi must lie strictly between 0 and 1")
    q = 1.0 / (1.0 - phi)
    r = np.sqrt(q * q + q ** 3 / 27.0)
    return float(-1.0 + np.cbrt(q + r) + np.cbrt(q - r))


# --------------------------------------------------------------------------
# text I/O
#
# Dense:  header "m n", then m lines of n space-separated decimals.
# Sparse: header "m n nnz", then nnz lines "row col value" (0-based).
# Values are printed with repr(), i.e. the shortest decimal that round-trips.


def write_matrix(path, M) -> None:
    with open(path, "w") as fh:
        if isinstance(M, SparseColMatrix):
            fh.write(f"{M.m} {M.n} {M.nnz}\n")
            for j in range(M.n):
                for r, v in zip(M.col_rows[j], M.col_vals[j]):
                    fh.write(f"{int(r)} {j} {float(v)!r}\n")
        else:
            M = np.atleast_2d(np.asarray(M, dtype=float))
            fh.write(f"{M.shape[0]} {M.shape[1]}\n")
            for row in M:
                fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def read_matrix(path):
    """Inverse of write_matrix; returns ndarray or SparseColMatrix."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) == 2:
            m, n = int(header[0]), int(header[1])
            data = np.loadtxt(fh, ndmin=2)
            if data.shape != (m, n):
                raise DimensionError(f"expected {m}x{n}, file holds {data.shape}")
            return data
        if len(header) == 3:
            m, n, nnz = (int(t) for t in header)
            rows = np.empty(nnz, dtype=np.intp)
            cols = np.empty(nnz, dtype=np.intp)
            vals = np.empty(nnz)
            for k in range(nnz):
                r, c, v = fh.readline().split()
                rows[k], cols[k], vals[k] = int(r), int(c), float(v)
            return SparseColMatrix.from_triplets(m, n, rows, cols, vals)
    raise ValueError("unrecognized matrix header")
