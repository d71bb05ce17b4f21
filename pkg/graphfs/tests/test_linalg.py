import numpy as np
import pytest

import graphfs.linalg as linalg
from graphfs.errors import ShapeError, NotPositiveDefiniteError, SingularMatrixError


@pytest.mark.parametrize(
    "a,b,expected",
    [
        (np.eye(3), np.arange(9.).reshape(3, 3), np.arange(9.).reshape(3, 3)),
        ([[1., 2.], [3., 4.]], [[0.], [1.]], [[2.], [4.]])
    ]
)
def test_matmul(a, b, expected):
    assert np.array_equal(linalg.matmul(a, b), np.asarray(expected))


def test_matmul_loop():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(5, 7)), rng.normal(size=(7, 3))
    expected = np.zeros((5, 3))
    for i in range(5):
        for j in range(3):
            for p in range(7):
                expected[i, j] += a[i, p] * b[p, j]
    assert np.allclose(linalg.matmul(a, b), expected, rtol=0., atol=1e-12)
    c = rng.normal(size=(3, 4))
    left = linalg.matmul(linalg.matmul(a, b), c)
    right = linalg.matmul(a, linalg.matmul(b, c))
    assert np.max(np.abs(left - right)) <= 1e-9 * np.max(np.abs(left))


def test_matmul_error():
    with pytest.raises(ShapeError):
        linalg.matmul(np.ones((2, 3)), np.ones((2, 3)))


@pytest.mark.parametrize(
    "a,expected",
    [
        (4. * np.eye(2), 2. * np.eye(2)),
        ([[4., 2.], [2., 5.]], [[2., 0.], [1., 2.]])
    ]
)
def test_cholesky(a, expected):
    factor = linalg.cholesky(a)
    assert np.allclose(factor.lower, expected)
    assert np.allclose(factor.reconstruct(), a)


def test_cholesky_random():
    rng = np.random.default_rng(1)
    m = rng.normal(size=(6, 6))
    a = m @ m.T + np.eye(6)
    factor = linalg.cholesky(a)
    assert np.array_equal(factor.lower, np.tril(factor.lower))
    assert np.linalg.norm(factor.reconstruct() - a) / np.linalg.norm(a) < 1e-10


def test_cholesky_error():
    with pytest.raises(NotPositiveDefiniteError) as info:
        linalg.cholesky([[1., 2.], [2., 1.]])
    assert info.value.pivot == 1
    with pytest.raises(ShapeError):
        linalg.cholesky([[1., 2.], [0., 1.]])


def test_solve_lower_triangular():
    b = np.arange(6.).reshape(3, 2)
    assert np.array_equal(linalg.solve_lower_triangular(np.eye(2), b), b)
    lower = np.array([[2., 0.], [1., 2.]])
    x = linalg.solve_lower_triangular(lower, np.eye(2), side="left")
    assert np.allclose(x, [[0.5, 0.], [-0.25, 0.5]])
    rng = np.random.default_rng(2)
    m = rng.normal(size=(5, 5))
    factor = linalg.cholesky(m @ m.T + np.eye(5))
    rhs = rng.normal(size=(7, 5))
    x = linalg.solve_lower_triangular(factor, rhs, side="right")
    assert np.max(np.abs(x @ factor.lower.T - rhs)) < 1e-10
    rhs = rng.normal(size=(5, 3))
    x = linalg.solve_lower_triangular(factor, rhs, side="left")
    assert np.max(np.abs(factor.lower @ x - rhs)) < 1e-10


def test_solve_lower_triangular_error():
    with pytest.raises(SingularMatrixError):
        linalg.solve_lower_triangular(np.array([[1., 0.], [1., 0.]]), np.eye(2))
    with pytest.raises(ShapeError):
        linalg.solve_lower_triangular(np.eye(2), np.ones((3, 3)))
    with pytest.raises(ValueError):
        linalg.solve_lower_triangular(np.eye(2), np.eye(2), side="up")


def test_inverse_lower():
    lower = np.array([[2., 0.], [1., 2.]])
    assert np.allclose(linalg.inverse_lower(lower), [[0.5, 0.], [-0.25, 0.5]])
    with pytest.raises(ShapeError):
        linalg.inverse_lower(np.eye(linalg.MAX_EXPLICIT_INVERSE + 1))


def test_jacobi_eigh_diagonal():
    eig = linalg.jacobi_eigh(np.diag([3., 1.]))
    assert np.allclose(eig.eigenvalues, [1., 3.])
    assert np.allclose(np.abs(eig.eigenvectors), [[0., 1.], [1., 0.]])


def test_jacobi_eigh():
    eig = linalg.jacobi_eigh([[2., 1.], [1., 2.]])
    assert np.allclose(eig.eigenvalues, [1., 3.])
    rng = np.random.default_rng(3)
    m = rng.normal(size=(6, 6))
    a = (m + m.T) / 2.
    eig = linalg.jacobi_eigh(a)
    assert np.linalg.norm(eig.reconstruct() - a) / np.linalg.norm(a) < 1e-8
    assert np.max(np.abs(eig.eigenvectors.T @ eig.eigenvectors - np.eye(6))) < 1e-10
    assert np.all(np.diff(eig.eigenvalues) >= 0.)
    assert np.allclose(eig.eigenvalues, np.linalg.eigvalsh(a))


def test_jacobi_eigh_error():
    with pytest.raises(ShapeError):
        linalg.jacobi_eigh([[1., 2.], [0., 1.]])


def test_pairwise_sq_dists():
    e = linalg.pairwise_sq_dists([[0., 0.], [3., 4.], [0., 0.]])
    assert e[0, 1] == 25.
    assert e[0, 2] == 0.
    rng = np.random.default_rng(4)
    x = rng.normal(size=(10, 4))
    e = linalg.pairwise_sq_dists(x)
    expected = np.array([[np.sum((x[i] - x[j]) ** 2) for j in range(10)] for i in range(10)])
    assert np.allclose(e, expected, rtol=0., atol=1e-12)
    assert np.array_equal(e, e.T)
    assert np.all(np.diag(e) == 0.)
    assert np.all(e >= 0.)


def test_pairwise_sq_dists_error():
    with pytest.raises(ShapeError):
        linalg.pairwise_sq_dists([[1., 2.]])
