"""The unique feature selector: relaxed selection by the Gumbel softmax and the de-duplication by the Cholesky
factorization of the perturbed Gram matrix."""
import typing as tp

import numpy as np
from numpy import ndarray

from graphfs import linalg
from graphfs.autodiff import ops
from graphfs.autodiff.tape import Var
from graphfs.datasets import make_rng
from graphfs.errors import ConfigError, ShapeError

__all__ = [
    "UfsParams",
    "SelectionResult",
    "sample_gumbel",
    "gumbel_from_uniform",
    "anneal_temperature",
    "soft_selection",
    "relaxed_selection",
    "orthogonalize_exact",
    "orthogonalize_practical",
    "orthogonalize_var",
    "hard_selection"
]

THETA_INIT_STD = 0.01
# the inverse factor amplifies the eigen residual by up to 1 / epsilon
EXACT_EIGH_TOL = 1e-14


class UfsParams:
    """The learnable logits of the selector and the constants of the relaxation.

    Attributes
    ----------
    theta : ndarray
        The d x m logits. Column j is the log weights of the j-th selected feature over the d features.

    epsilon : float
        The positive perturbation added to the Gram matrix before the factorization. Default 1e-4.

    t0 : float
        The temperature at the first epoch. Default 10.

    t_min : float
        The temperature at the last epoch. Default 0.01.

    epochs_total : int
        The number of epochs of the annealing.
    """

    def __init__(
        self, theta: ndarray, epsilon: float = 1e-4, t0: float = 10., t_min: float = 0.01, epochs_total: int = 1000
    ):
        self.theta = np.asarray(theta, dtype=np.float64)
        self.epsilon = float(epsilon)
        self.t0 = float(t0)
        self.t_min = float(t_min)
        self.epochs_total = int(epochs_total)
        self.validate()

    @classmethod
    def init(cls, d: int, m: int, seed: int = 0, **kwargs) -> "UfsParams":
        """Initialize the logits with i.i.d. small Gaussian values, so the first softmax is near uniform."""
        if not 1 <= m <= d:
            raise ConfigError("m", "must be in [1, {}], got {}.".format(d, m))
        theta = make_rng(seed, "graphfs.selection.init").normal(0., THETA_INIT_STD, size=(d, m))
        return cls(theta, **kwargs)

    @property
    def d(self) -> int:
        return self.theta.shape[0]

    @property
    def m(self) -> int:
        return self.theta.shape[1]

    def validate(self) -> None:
        if self.theta.ndim != 2:
            raise ShapeError("The logits must be a d x m matrix, got shape {}.".format(self.theta.shape))
        if not self.epsilon > 0.:
            raise ConfigError("epsilon", "must be positive, got {}.".format(self.epsilon))
        if not self.t_min > 0.:
            raise ConfigError("t_min", "must be positive, got {}.".format(self.t_min))
        if not self.t0 >= self.t_min:
            raise ConfigError("t0", "must be no less than t_min = {}, got {}.".format(self.t_min, self.t0))
        if self.epochs_total < 1:
            raise ConfigError("epochs_total", "must be at least 1, got {}.".format(self.epochs_total))

    def copy(self) -> "UfsParams":
        return UfsParams(self.theta.copy(), self.epsilon, self.t0, self.t_min, self.epochs_total)


class SelectionResult:
    """The discrete selection read from a selection matrix.

    Attributes
    ----------
    F : ndarray
        The d x m selection matrix.

    hard_indices : tuple of int
        The index of the largest entry of each column, the lowest index on ties.

    duplicates : bool
        True if a feature is selected more than once.
    """

    def __init__(self, F: ndarray, hard_indices: tp.Sequence[int], duplicates: bool):
        self.F = F
        self.hard_indices = tuple(int(i) for i in hard_indices)
        self.duplicates = bool(duplicates)

    def __repr__(self):
        return "SelectionResult(hard_indices={}, duplicates={})".format(self.hard_indices, self.duplicates)

    def to_dict(self) -> dict:
        return {"hard_indices": list(self.hard_indices), "duplicates": self.duplicates, "F": self.F.tolist()}

    @classmethod
    def from_dict(cls, dct: dict) -> "SelectionResult":
        indices = [int(i) for i in dct["hard_indices"]]
        F = np.asarray(dct["F"], dtype=np.float64) if dct.get("F") is not None else np.zeros((0, len(indices)))
        return cls(F, indices, len(set(indices)) != len(indices))


def gumbel_from_uniform(u: ndarray) -> ndarray:
    """Map uniform samples in (0, 1) to standard Gumbel samples by -log(-log(u))."""
    return -np.log(-np.log(u))


def sample_gumbel(rows: int, cols: int, seed: int, epoch: int = 0) -> ndarray:
    """A matrix of i.i.d. standard Gumbel samples, fixed by the seed and the epoch."""
    rng = make_rng(seed, "graphfs.selection.gumbel", epoch)
    u = rng.uniform(np.finfo(np.float64).tiny, 1., size=(rows, cols))
    return gumbel_from_uniform(u)


def anneal_temperature(epoch: int, p: UfsParams) -> float:
    """The temperature of the geometric schedule from t0 at the first epoch to t_min at the last epoch."""
    if not 0 <= epoch < p.epochs_total:
        raise ConfigError("epoch", "must be in [0, {}), got {}.".format(p.epochs_total, epoch))
    if p.epochs_total == 1:
        return p.t0
    return p.t0 * (p.t_min / p.t0) ** (epoch / (p.epochs_total - 1))


def _column_softmax(z: ndarray) -> ndarray:
    z = z - z.max(axis=0, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=0, keepdims=True)


def soft_selection(p: UfsParams, epoch: int, seed: int, noise: bool = True) -> ndarray:
    """The relaxed d x m selection matrix, each column a softmax of the perturbed logits over the features.

    Parameters
    ----------
    p : UfsParams
        The logits and the annealing constants.

    epoch : int
        The epoch, which fixes the temperature and the Gumbel noise.

    seed : int
        The random seed of the noise.

    noise : bool
        If False, the Gumbel noise is zero.

    Returns
    -------
    fhat : ndarray
        The column stochastic d x m matrix.
    """
    t = anneal_temperature(epoch, p)
    g = sample_gumbel(p.d, p.m, seed, epoch) if noise else 0.
    return _column_softmax((p.theta + g) / t)


def relaxed_selection(theta: Var, gumbel: tp.Union[ndarray, float], temperature: float) -> Var:
    """The tape version of the relaxed selection."""
    return ops.softmax(ops.scale(theta + gumbel, 1. / temperature), axis=-2)


def _perturbed_gram(fhat: ndarray, eps: float) -> ndarray:
    fhat = linalg.as_matrix(fhat, "relaxed selection")
    d, m = fhat.shape
    if m > d:
        raise ShapeError("Cannot select {} features out of {}.".format(m, d))
    if not eps > 0.:
        raise ConfigError("epsilon", "must be positive, got {}.".format(eps))
    gram = fhat.T @ fhat
    # exact symmetry for the factorization
    return (gram + gram.T) / 2. + eps * np.eye(m)


def orthogonalize_exact(fhat: ndarray, eps: float = 1e-4) -> ndarray:
    """A column orthogonal matrix built from the spectral decomposition and the Cholesky factor.

    The perturbed Gram matrix A = fhat.T @ fhat + eps * I is decomposed as P diag(w) P.T and as L L.T. The result
    is [diag(w)^(1/2) P.T; 0] @ inv(L).T, whose Gram matrix is the identity for any input.

    Parameters
    ----------
    fhat : ndarray
        The d x m relaxed selection with m no larger than d.

    eps : float
        The positive perturbation.

    Returns
    -------
    F : ndarray
        The d x m matrix with orthonormal columns.
    """
    a = _perturbed_gram(fhat, eps)
    d, m = fhat.shape
    eig = linalg.jacobi_eigh(a, tol=EXACT_EIGH_TOL)
    top = np.sqrt(np.clip(eig.eigenvalues, 0., None))[:, None] * eig.eigenvectors.T
    q = np.zeros((d, m))
    q[:m] = top
    factor = linalg.cholesky(a)
    return linalg.solve_lower_triangular(factor, q, side="right")


def orthogonalize_practical(fhat: ndarray, eps: float = 1e-4) -> tp.Tuple[ndarray, linalg.CholeskyFactor]:
    """The selection fhat @ inv(L).T where L L.T = fhat.T @ fhat + eps * I.

    Its Gram matrix is I - eps * inv(L) @ inv(L).T, so it approaches a column orthogonal matrix as eps
    vanishes while keeping the support of fhat.

    Returns
    -------
    F : ndarray
        The d x m de-duplicated selection.

    factor : CholeskyFactor
        The factor L, which gives the residual of the Gram identity.
    """
    a = _perturbed_gram(fhat, eps)
    factor = linalg.cholesky(a)
    return linalg.solve_lower_triangular(factor, fhat, side="right"), factor


def orthogonalize_var(fhat: Var, eps: float) -> Var:
    """The tape version of the practical de-duplication."""
    m = fhat.shape[-1]
    gram = ops.matmul(ops.transpose(fhat), fhat)
    gram = ops.scale(gram + ops.transpose(gram), 0.5) + eps * np.eye(m)
    lower = ops.cholesky(gram)
    return ops.solve_lower_right(fhat, lower)


def hard_selection(F: ndarray) -> SelectionResult:
    """Read the selected features as the argmax of each column, the lowest index on ties."""
    F = linalg.as_matrix(F, "selection matrix")
    indices = np.argmax(F, axis=0)
    return SelectionResult(F, indices, len(set(indices.tolist())) != len(indices))
