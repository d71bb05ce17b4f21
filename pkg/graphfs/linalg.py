"""Dense float64 matrices and the decompositions used by the feature selector and the graph learner."""
import typing as tp

import numpy as np
from numpy import ndarray
from scipy.linalg import solve_triangular
from scipy.spatial.distance import pdist, squareform

from graphfs.errors import ShapeError, NotPositiveDefiniteError, SingularMatrixError

__all__ = [
    "DenseMatrix",
    "CholeskyFactor",
    "SymEig",
    "as_matrix",
    "matmul",
    "cholesky",
    "solve_lower_triangular",
    "inverse_lower",
    "jacobi_eigh",
    "pairwise_sq_dists",
    "is_symmetric",
    "MAX_EXPLICIT_INVERSE"
]

DenseMatrix = ndarray
MAX_EXPLICIT_INVERSE = 512
SYMMETRY_TOL = 1e-12


class CholeskyFactor:
    """The lower triangular factor of a symmetric positive definite matrix.

    Attributes
    ----------
    lower : ndarray
        The m x m lower triangular matrix L with strictly positive diagonal and L @ L.T equal to the input.
    """

    def __init__(self, lower: ndarray):
        self.lower = lower

    @property
    def size(self) -> int:
        return self.lower.shape[0]

    def reconstruct(self) -> ndarray:
        """Return L @ L.T."""
        return self.lower @ self.lower.T


class SymEig:
    """The spectral decomposition of a symmetric matrix.

    Attributes
    ----------
    eigenvalues : ndarray
        The eigenvalues in ascending order.

    eigenvectors : ndarray
        The orthogonal matrix whose columns are the eigenvectors in the same order as the eigenvalues.

    sweeps : int
        The number of Jacobi sweeps used.
    """

    def __init__(self, eigenvalues: ndarray, eigenvectors: ndarray, sweeps: int = 0):
        self.eigenvalues = eigenvalues
        self.eigenvectors = eigenvectors
        self.sweeps = sweeps

    def reconstruct(self) -> ndarray:
        """Return P @ diag(w) @ P.T."""
        p = self.eigenvectors
        return (p * self.eigenvalues) @ p.T


def as_matrix(a: tp.Any, name: str = "matrix") -> ndarray:
    """Convert the input to a two dimensional float64 array."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError("The {} must be two dimensional, got shape {}.".format(name, arr.shape))
    return arr


def is_symmetric(a: ndarray, tol: float = SYMMETRY_TOL) -> bool:
    """Check the symmetry of a square matrix with a tolerance relative to its largest entry."""
    if a.shape[0] != a.shape[1]:
        return False
    scale = max(1., float(np.max(np.abs(a)))) if a.size else 1.
    return bool(np.max(np.abs(a - a.T), initial=0.) <= tol * scale)


def _check_square_symmetric(a: ndarray, name: str) -> None:
    if a.shape[0] != a.shape[1]:
        raise ShapeError("The {} must be square, got shape {}.".format(name, a.shape))
    if not is_symmetric(a):
        raise ShapeError("The {} is not symmetric.".format(name))


def matmul(a: ndarray, b: ndarray) -> ndarray:
    """The standard matrix product of two matrices."""
    a, b = as_matrix(a, "left operand"), as_matrix(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise ShapeError("Cannot multiply matrices of shape {} and {}.".format(a.shape, b.shape))
    return a @ b


def cholesky(a: ndarray) -> CholeskyFactor:
    """Factorize a symmetric positive definite matrix as L @ L.T.

    The factorization is done column by column. The first non-positive pivot stops it.

    Parameters
    ----------
    a : ndarray
        The symmetric positive definite matrix.

    Returns
    -------
    factor : CholeskyFactor
        The lower triangular factor.

    Raises
    ------
    NotPositiveDefiniteError
        If a pivot is not positive. The error carries the index of the pivot.
    """
    a = as_matrix(a)
    _check_square_symmetric(a, "matrix to factorize")
    m = a.shape[0]
    lower = np.zeros_like(a)
    for j in range(m):
        row = lower[j, :j]
        pivot = a[j, j] - row @ row
        if not pivot > 0.:
            raise NotPositiveDefiniteError(j, float(pivot))
        ljj = np.sqrt(pivot)
        lower[j, j] = ljj
        if j + 1 < m:
            lower[j + 1:, j] = (a[j + 1:, j] - lower[j + 1:, :j] @ row) / ljj
    return CholeskyFactor(lower)


def _lower_of(factor: tp.Union[CholeskyFactor, ndarray]) -> ndarray:
    lower = factor.lower if isinstance(factor, CholeskyFactor) else as_matrix(factor, "triangular factor")
    if lower.shape[0] != lower.shape[1]:
        raise ShapeError("The triangular factor must be square, got shape {}.".format(lower.shape))
    diag = np.diag(lower)
    zeros = np.flatnonzero(diag == 0.)
    if zeros.size > 0:
        raise SingularMatrixError("The triangular factor has a zero at diagonal position {}.".format(zeros[0]))
    return lower


def solve_lower_triangular(
    factor: tp.Union[CholeskyFactor, ndarray], b: ndarray, side: str = "right"
) -> ndarray:
    """Solve a linear system with a lower triangular matrix.

    Parameters
    ----------
    factor : CholeskyFactor or ndarray
        The m x m lower triangular matrix L.

    b : ndarray
        The right hand side. It has m columns if side is "right" and m rows if side is "left".

    side : str
        "right" returns X with X @ L.T = b, namely b @ inv(L).T. "left" returns X with L @ X = b.

    Returns
    -------
    x : ndarray
        The solution.
    """
    lower = _lower_of(factor)
    b = as_matrix(b, "right hand side")
    m = lower.shape[0]
    if side == "right":
        if b.shape[1] != m:
            raise ShapeError("Expect {} columns in the right hand side, got {}.".format(m, b.shape[1]))
        return solve_triangular(lower, b.T, lower=True).T
    elif side == "left":
        if b.shape[0] != m:
            raise ShapeError("Expect {} rows in the right hand side, got {}.".format(m, b.shape[0]))
        return solve_triangular(lower, b, lower=True)
    raise ValueError("Unknown side: {}. Allowed: 'left', 'right'.".format(side))


def inverse_lower(factor: tp.Union[CholeskyFactor, ndarray]) -> ndarray:
    """The explicit inverse of a small lower triangular matrix."""
    lower = _lower_of(factor)
    m = lower.shape[0]
    if m > MAX_EXPLICIT_INVERSE:
        raise ShapeError(
            "Explicit inverse is only allowed up to size {}, got {}. Use solve_lower_triangular.".format(
                MAX_EXPLICIT_INVERSE, m)
        )
    return solve_triangular(lower, np.eye(m), lower=True)


def _off_norm(a: ndarray) -> float:
    return float(np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.)))


def jacobi_eigh(a: ndarray, tol: float = 1e-10, max_sweeps: int = 100) -> SymEig:
    """Spectral decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps over all the (p, q) pairs until the Frobenius norm of the off-diagonal part drops below
    tol (relative to the norm of the input when it is larger than one) or max_sweeps is reached.

    Parameters
    ----------
    a : ndarray
        The symmetric matrix.

    tol : float
        The tolerance of the off-diagonal norm.

    max_sweeps : int
        The maximum number of sweeps.

    Returns
    -------
    eig : SymEig
        The eigenvalues in ascending order and the eigenvectors in columns.
    """
    a = as_matrix(a)
    _check_square_symmetric(a, "matrix to decompose")
    m = a.shape[0]
    work = (a + a.T) / 2.
    vecs = np.eye(m)
    threshold = tol * max(1., float(np.linalg.norm(work)))
    sweep = 0
    while sweep < max_sweeps and _off_norm(work) >= threshold:
        sweep += 1
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = work[p, q]
                if apq == 0.:
                    continue
                theta = (work[q, q] - work[p, p]) / (2. * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.)) if theta != 0. else 1.
                c = 1. / np.sqrt(t * t + 1.)
                s = t * c
                col_p, col_q = work[:, p].copy(), work[:, q].copy()
                work[:, p], work[:, q] = c * col_p - s * col_q, s * col_p + c * col_q
                row_p, row_q = work[p, :].copy(), work[q, :].copy()
                work[p, :], work[q, :] = c * row_p - s * row_q, s * row_p + c * row_q
                work[p, q] = work[q, p] = 0.
                vec_p, vec_q = vecs[:, p].copy(), vecs[:, q].copy()
                vecs[:, p], vecs[:, q] = c * vec_p - s * vec_q, s * vec_p + c * vec_q
    values = np.diag(work).copy()
    # stable order keeps the identity for an already diagonal input
    order = np.argsort(values, kind="stable")
    return SymEig(values[order], vecs[:, order], sweeps=sweep)


def pairwise_sq_dists(x: ndarray) -> ndarray:
    """Squared Euclidean distances between the rows of x.

    The result is exactly symmetric with an exactly zero diagonal and no negative entries.
    """
    x = as_matrix(x, "sample matrix")
    if x.shape[0] < 2:
        raise ShapeError("Need at least two samples, got {}.".format(x.shape[0]))
    return squareform(pdist(x, "sqeuclidean"))
