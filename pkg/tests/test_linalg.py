"""Sparse columns, Jacobi eigensolver, polynomial roots, matrix text I/O."""

import numpy as np
import pytest

from dcmin.linalg import (
    DimensionError,
    SparseColMatrix,
    cardano_K,
    gram_diagonal,
    matvec,
    read_matrix,
    real_roots,
    rmatvec,
    spectral_norm_sq,
    sym_eig,
    write_matrix,
)


# ---------------------------------------------------------------- sparse

def random_sparse(rng, m, n, density=0.3):
    M = rng.standard_normal((m, n))
    M[rng.random((m, n)) > density] = 0.0
    return M


def test_from_dense_round_trip():
    rng = np.random.default_rng(1)
    M = random_sparse(rng, 7, 5)
    S = SparseColMatrix.from_dense(M)
    assert S.shape == (7, 5)
    assert S.nnz == np.count_nonzero(M)
    np.testing.assert_array_equal(S.toarray(), M)


def test_from_triplets_sorts_and_drops_zeros():
    S = SparseColMatrix.from_triplets(
        3, 2, rows=[2, 0, 1], cols=[0, 0, 1], vals=[5.0, 3.0, 0.0])
    expect = np.array([[3.0, 0.0], [0.0, 0.0], [5.0, 0.0]])
    np.testing.assert_array_equal(S.toarray(), expect)
    assert S.nnz == 2


def test_column_extraction():
    rng = np.random.default_rng(2)
    M = random_sparse(rng, 6, 4)
    S = SparseColMatrix.from_dense(M)
    for j in range(4):
        np.testing.assert_array_equal(S.column(j), M[:, j])


def test_scale_rows_matches_dense():
    rng = np.random.default_rng(3)
    M = random_sparse(rng, 6, 4)
    w = rng.standard_normal(6)
    w[0] = 0.0  # zero weight must drop entries, not keep explicit zeros
    S = SparseColMatrix.from_dense(M).scale_rows(w)
    np.testing.assert_allclose(S.toarray(), np.diag(w) @ M, rtol=0, atol=0)
    assert S.nnz == np.count_nonzero(np.diag(w) @ M)


def test_sparse_validation():
    with pytest.raises(DimensionError):
        SparseColMatrix(2, 1, (np.array([0, 5]),), (np.array([1.0, 2.0]),))
    with pytest.raises(ValueError):
        SparseColMatrix(3, 1, (np.array([1, 1]),), (np.array([1.0, 2.0]),))
    with pytest.raises(DimensionError):
        SparseColMatrix(3, 2, (np.array([0]),), (np.array([1.0]),))


@pytest.mark.parametrize("shape", [(5, 8), (8, 5), (1, 4), (4, 1)])
def test_matvec_rmatvec_gram(shape):
    rng = np.random.default_rng(shape[0] * 10 + shape[1])
    M = random_sparse(rng, *shape)
    S = SparseColMatrix.from_dense(M)
    v = rng.standard_normal(shape[1])
    u = rng.standard_normal(shape[0])
    np.testing.assert_allclose(matvec(S, v), M @ v, atol=1e-12)
    np.testing.assert_allclose(rmatvec(S, u), M.T @ u, atol=1e-12)
    np.testing.assert_allclose(gram_diagonal(S), np.diag(M.T @ M), atol=1e-12)
    np.testing.assert_allclose(matvec(M, v), M @ v)
    np.testing.assert_allclose(rmatvec(M, u), M.T @ u)
    np.testing.assert_allclose(gram_diagonal(M), np.diag(M.T @ M), atol=1e-12)


def test_matvec_dimension_errors():
    M = np.ones((3, 2))
    with pytest.raises(DimensionError):
        matvec(M, np.ones(3))
    with pytest.raises(DimensionError):
        rmatvec(SparseColMatrix.from_dense(M), np.ones(2))


# ----------------------------------------------------- spectral / eigen

def test_spectral_norm_sq_matches_top_eigenvalue():
    rng = np.random.default_rng(7)
    for m, n in [(10, 6), (6, 10)]:
        G = rng.standard_normal((m, n))
        lam = spectral_norm_sq(G)
        expect = np.max(sym_eig(G.T @ G)[0])
        assert lam == pytest.approx(expect, rel=1e-8)


def test_spectral_norm_sq_zero_matrix():
    assert spectral_norm_sq(np.zeros((4, 3))) == 0.0


def test_sym_eig_reconstructs_and_orders():
    rng = np.random.default_rng(11)
    for n in [1, 2, 5, 12]:
        B = rng.standard_normal((n, n))
        S = B + B.T
        lam, U = sym_eig(S)
        assert np.all(np.diff(lam) <= 1e-12)  # descending
        np.testing.assert_allclose(U.T @ U, np.eye(n), atol=1e-10)
        np.testing.assert_allclose(U @ np.diag(lam) @ U.T, S, atol=1e-9)


def test_sym_eig_known_2x2():
    lam, U = sym_eig(np.array([[2.0, 1.0], [1.0, 2.0]]))
    np.testing.assert_allclose(lam, [3.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(np.abs(U[:, 0]), np.sqrt(0.5), atol=1e-12)


def test_sym_eig_rejects_bad_input():
    with pytest.raises(DimensionError):
        sym_eig(np.ones((2, 3)))
    with pytest.raises(ValueError):
        sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(DimensionError):
        sym_eig(np.eye(65))


# -------------------------------------------------------------- roots

def poly_from_roots(roots):
    c = np.array([1.0])
    for r in roots:
        c = np.convolve(c, [1.0, -r])
    return c


def test_real_roots_known_sets():
    for roots in ([2.0], [-1.0, 3.0], [-2.0, 0.5, 4.0], [-3.0, -1.0, 1.0, 2.5]):
        got = real_roots(poly_from_roots(roots))
        np.testing.assert_allclose(got, sorted(roots), atol=1e-8)


def test_real_roots_complex_pairs_excluded():
    # (x^2 + 1)(x - 2): only the real root survives
    c = np.convolve([1.0, 0.0, 1.0], [1.0, -2.0])
    np.testing.assert_allclose(real_roots(c), [2.0], atol=1e-8)
    # x^4 + 1 has no real roots at all
    assert real_roots([1.0, 0.0, 0.0, 0.0, 1.0]).size == 0


def test_real_roots_merges_multiplicity():
    got = real_roots(poly_from_roots([1.5, 1.5, -2.0]))
    np.testing.assert_allclose(got, [-2.0, 1.5], atol=1e-6)


def test_real_roots_trims_leading_zeros():
    np.testing.assert_allclose(real_roots([0.0, 2.0, -6.0]), [3.0], atol=1e-12)


def test_real_roots_errors():
    with pytest.raises(ValueError):
        real_roots([0.0, 0.0])
    with pytest.raises(ValueError):
        real_roots([1.0, 0, 0, 0, 0, 1.0])
    with pytest.raises(ValueError):
        real_roots([np.nan, 1.0])


def test_real_roots_random_cross_check():
    rng = np.random.default_rng(23)
    for _ in range(100):
        deg = rng.integers(2, 5)
        roots = np.round(rng.uniform(-5, 5, size=deg), 2)
        got = real_roots(poly_from_roots(roots))
        np.testing.assert_allclose(got, np.unique(np.sort(roots)), atol=1e-5)


def test_cardano_K_satisfies_cubic():
    rng = np.random.default_rng(31)
    for phi in rng.uniform(1e-6, 1 - 1e-6, size=200):
        t = cardano_K(float(phi))
        residual = 1.0 - t - (1.0 + t) ** 3 * (1.0 - phi)
        assert abs(residual) <= 1e-8
        assert t > 0.0
    with pytest.raises(ValueError):
        cardano_K(0.0)
    with pytest.raises(ValueError):
        cardano_K(1.0)


# ---------------------------------------------------------------- I/O

def test_matrix_io_dense(tmp_path):
    rng = np.random.default_rng(41)
    M = rng.standard_normal((4, 3))
    path = tmp_path / "dense.txt"
    write_matrix(path, M)
    np.testing.assert_array_equal(read_matrix(path), M)


def test_matrix_io_sparse(tmp_path):
    rng = np.random.default_rng(43)
    S = SparseColMatrix.from_dense(random_sparse(rng, 5, 4))
    path = tmp_path / "sparse.txt"
    write_matrix(path, S)
    back = read_matrix(path)
    assert isinstance(back, SparseColMatrix)
    np.testing.assert_array_equal(back.toarray(), S.toarray())


def test_matrix_io_byte_identical_rewrite(tmp_path):
    rng = np.random.default_rng(47)
    M = rng.standard_normal((3, 3))
    p1, p2 = tmp_path / "a.txt", tmp_path / "b.txt"
    write_matrix(p1, M)
    write_matrix(p2, read_matrix(p1))
    assert p1.read_bytes() == p2.read_bytes()
