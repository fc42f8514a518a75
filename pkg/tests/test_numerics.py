import numpy as np
import pytest

from ratio_cs import numerics as nx
from ratio_cs.errors import RankDeficient


def test_kernel_basis_row4():
    A = np.array([[1.0, 1.0, 1.0, -1.0]])
    N = nx.kernel_basis(A)
    assert N.shape == (4, 3)
    assert np.abs(A @ N).max() <= 1e-12
    np.testing.assert_allclose(N.T @ N, np.eye(3), atol=1e-12)


def test_kernel_basis_square_identity_is_empty():
    N = nx.kernel_basis(np.eye(2))
    assert N.shape == (2, 0)


def test_kernel_basis_gaussian_3x5():
    A = nx.gaussian_matrix(nx.seeded_rng(7), 3, 5)
    N = nx.kernel_basis(A)
    assert N.shape == (5, 2)
    assert np.linalg.norm(A.T @ A @ N) <= 1e-10 * np.abs(A).max()
    np.testing.assert_allclose(N.T @ N, np.eye(2), atol=1e-10)


def test_kernel_basis_rank_deficient():
    A = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]])
    with pytest.raises(RankDeficient):
        nx.kernel_basis(A)


@pytest.mark.parametrize("A, b, want", [
    (np.eye(3), [1, 2, 3], [1, 2, 3]),
    ([[1.0], [1.0]], [1, 3], [2]),
    ([[1, 0], [0, 2], [0, 0]], [3, 4, 5], [3, 2]),
])
def test_least_squares_examples(A, b, want):
    np.testing.assert_allclose(nx.least_squares(A, b), want, atol=1e-12)


def test_least_squares_residual_orthogonal():
    rng = nx.seeded_rng(3)
    A = rng.standard_normal((20, 5))
    b = rng.standard_normal(20)
    r = A @ nx.least_squares(A, b) - b
    assert np.abs(A.T @ r).max() <= 1e-8


def test_least_squares_dependent_columns():
    with pytest.raises(RankDeficient):
        nx.least_squares([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]], [1, 2, 3])


def test_gaussian_matrix_determinism_and_streams():
    a = nx.gaussian_matrix(nx.seeded_rng(1), 2, 2)
    b = nx.gaussian_matrix(nx.seeded_rng(1), 2, 2)
    assert np.array_equal(a, b)
    c = nx.gaussian_matrix(nx.seeded_rng(1, 0), 2, 2)
    d = nx.gaussian_matrix(nx.seeded_rng(1, 1), 2, 2)
    assert not np.array_equal(c, d)


def test_gaussian_matrix_mean():
    A = nx.gaussian_matrix(nx.seeded_rng(1), 50, 250)
    assert abs(A.mean()) <= 4 / np.sqrt(12500)


def test_factorization_round_trips():
    A = nx.gaussian_matrix(nx.seeded_rng(5), 50, 250)
    scale = np.abs(A).max()
    f = nx.qr_transpose(A)
    assert np.abs(f.reconstruct() - A).max() <= 1e-10 * scale
    k = nx.kkt_factor(A, 0.7)
    K = k.factors[3]
    assert np.abs(k.reconstruct() - K).max() <= 1e-10 * np.abs(K).max()
    c = nx.cholesky_factor(A, 0.3)
    G = A @ A.T + 0.3 * np.eye(50)
    assert np.abs(c.reconstruct() - G).max() <= 1e-10 * np.abs(G).max()


def test_matrix_text_round_trip(tmp_path):
    A = nx.gaussian_matrix(nx.seeded_rng(2), 4, 6)
    nx.write_matrix(tmp_path / "A.mat", A)
    assert (tmp_path / "A.mat").read_text().splitlines()[0] == "4 6"
    assert np.array_equal(nx.read_matrix(tmp_path / "A.mat"), A)
    x = A[0]
    nx.write_vector(tmp_path / "x.vec", x)
    assert np.array_equal(nx.read_vector(tmp_path / "x.vec"), x)


def test_read_matrix_shape_mismatch(tmp_path):
    (tmp_path / "bad.mat").write_text("2 2\n1 2\n3\n")
    with pytest.raises(ValueError):
        nx.read_matrix(tmp_path / "bad.mat")


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        nx.as_matrix([[1.0, np.nan]])
