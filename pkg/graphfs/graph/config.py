"""Objects used in the graph learning."""
import typing as tp

import numpy as np
from numpy import ndarray

from graphfs.errors import ConfigError, ShapeError

__all__ = ["GraphLearnerConfig", "TransportPlan", "SelectorPair", "SimilarityGraph", "marginals", "laplacian"]


class GraphLearnerConfig:
    """A configuration class of the differentiable k-NN graph learner.

    Attributes
    ----------
    k : int
        The number of neighbors of each sample. Default 5.

    gamma : float
        The weight of the entropy in the transport problem. The smaller, the closer to the exact sorting.
        Default 0.1.

    zeta : int
        The number of Bregman projection iterations. Default 200.

    rescale_rows : bool
        If True, each distance row is rescaled before the transport as set by scaling. Default True.

    scaling : str
        "knn" maps the nearest distance of each row to 0 and the (k + 1)-th nearest to k, which lines the
        neighbors up with the supports of the transport. "max" divides the row by its largest entry. The sample
        itself is excluded in both. Default "knn".

    candidates : int
        If given, the transport of each row runs on its nearest candidates only. Fewer than k + 2 are raised to
        k + 2. The other entries get zero selectors. Default None, the whole row.

    diag_mask : float
        The distance that replaces the distance of a sample to itself. Default 1e6.
    """

    def __init__(
        self, k: int = 5, gamma: float = 0.1, zeta: int = 200, rescale_rows: bool = True, diag_mask: float = 1e6,
        scaling: str = "knn", candidates: int = None
    ):
        self.k = int(k)
        self.gamma = float(gamma)
        self.zeta = int(zeta)
        self.rescale_rows = bool(rescale_rows)
        self.diag_mask = float(diag_mask)
        self.scaling = str(scaling)
        self.candidates = None if candidates is None else int(candidates)
        self.validate()

    def __repr__(self):
        return "GraphLearnerConfig({})".format(
            ", ".join("{}={}".format(key, value) for key, value in self.to_dict().items())
        )

    def validate(self, n: int = None) -> None:
        """Check the values. If the number of samples is given, also check that k + 2 <= n."""
        if self.k < 1:
            raise ConfigError("k", "must be at least 1, got {}.".format(self.k))
        if not self.gamma > 0.:
            raise ConfigError("gamma", "must be positive, got {}.".format(self.gamma))
        if self.zeta < 1:
            raise ConfigError("zeta", "must be at least 1, got {}.".format(self.zeta))
        if not self.diag_mask > 0.:
            raise ConfigError("diag_mask", "must be positive, got {}.".format(self.diag_mask))
        if self.scaling not in ("knn", "max"):
            raise ConfigError("scaling", "must be 'knn' or 'max', got '{}'.".format(self.scaling))
        if self.candidates is not None and self.candidates < 1:
            raise ConfigError("candidates", "must be positive, got {}.".format(self.candidates))
        if n is not None and self.k + 2 > n:
            raise ConfigError("k", "k + 2 must not exceed the number of samples {}, got k = {}.".format(n, self.k))

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "gamma": self.gamma,
            "zeta": self.zeta,
            "rescale_rows": self.rescale_rows,
            "diag_mask": self.diag_mask,
            "scaling": self.scaling,
            "candidates": self.candidates
        }

    @classmethod
    def from_dict(cls, dct: dict) -> "GraphLearnerConfig":
        keys = ("k", "gamma", "zeta", "rescale_rows", "diag_mask", "scaling", "candidates")
        return cls(**{key: dct[key] for key in keys if key in dct})


def marginals(n: int, k: int) -> tp.Tuple[ndarray, ndarray]:
    """The source and the target marginals of the top-k transport problem of one distance row.

    The n sources carry 1 / n each. The first k + 1 targets take 1 / n each and the last one takes the
    remaining (n - k - 1) / n.
    """
    if k + 2 > n:
        raise ConfigError("k", "k + 2 must not exceed the row length {}, got k = {}.".format(n, k))
    mu = np.full(n, 1. / n)
    nu = np.full(k + 2, 1. / n)
    nu[-1] = (n - k - 1) / n
    return mu, nu


class TransportPlan:
    """The entropic transport plan from the n entries of a distance row to the k + 2 supports 0, 1, ..., k + 1.

    Attributes
    ----------
    gamma_matrix : ndarray
        The non-negative n x (k + 2) plan, or a stack of plans with the leading batch axes.

    mode : str
        "scaling" if the iterations ran on the kernel, "log" if they ran on the log potentials.
    """

    def __init__(self, gamma_matrix: ndarray, mode: str = "log"):
        self.gamma_matrix = gamma_matrix
        self.mode = mode

    @property
    def n(self) -> int:
        return self.gamma_matrix.shape[-2]

    @property
    def k(self) -> int:
        return self.gamma_matrix.shape[-1] - 2

    def marginal_violation(self) -> float:
        """The largest absolute deviation of the row and the column sums from the marginals."""
        mu, nu = marginals(self.n, self.k)
        rows = np.max(np.abs(self.gamma_matrix.sum(axis=-1) - mu))
        cols = np.max(np.abs(self.gamma_matrix.sum(axis=-2) - nu))
        return float(max(rows, cols))


class SelectorPair:
    """The soft indicators of the k smallest entries and of the (k + 1)-th smallest entry of a distance row.

    Attributes
    ----------
    delta : ndarray
        The membership of the k smallest entries. Exactly k ones in the hard limit.

    xi : ndarray
        The indicator of the (k + 1)-th smallest entry. One-hot in the hard limit.

    hard : bool
        True if the selectors come from the exact sorting.
    """

    def __init__(self, delta: ndarray, xi: ndarray, hard: bool = False):
        if delta.shape != xi.shape:
            raise ShapeError("The selectors have different shapes {} and {}.".format(delta.shape, xi.shape))
        self.delta = delta
        self.xi = xi
        self.hard = hard

    def __repr__(self):
        return "SelectorPair(delta={}, xi={}, hard={})".format(self.delta, self.xi, self.hard)


def laplacian(s: ndarray) -> ndarray:
    """The Laplacian D - (S + S.T) / 2 where D is the degree matrix of the symmetrized similarity."""
    sym = (s + s.T) / 2.
    return np.diag(sym.sum(axis=1)) - sym


class SimilarityGraph:
    """A similarity graph over n samples.

    Attributes
    ----------
    S : ndarray
        The n x n non-negative similarity matrix with a zero diagonal. The rows of a graph learned with the hard
        selectors sum to one. The soft selectors give rows that sum to about one, closer as gamma decreases.

    symmetrized : ndarray
        The symmetric similarity (S + S.T) / 2.

    laplacian : ndarray
        The Laplacian of the symmetrized similarity.
    """

    def __init__(self, S: ndarray):
        S = np.asarray(S, dtype=np.float64)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise ShapeError("The similarity matrix must be square, got shape {}.".format(S.shape))
        self.S = S
        self.symmetrized = (S + S.T) / 2.
        self.laplacian = laplacian(S)

    def __repr__(self):
        return "SimilarityGraph(n={}, edges={})".format(self.n, self.n_edges)

    @property
    def n(self) -> int:
        return self.S.shape[0]

    @property
    def n_edges(self) -> int:
        """The number of directed edges with a positive weight."""
        return int(np.count_nonzero(self.S))

    def edges(self) -> tp.Tuple[ndarray, ndarray, ndarray]:
        """The source, the target and the weight of the directed edges in row-major order."""
        rows, cols = np.nonzero(self.S)
        return rows, cols, self.S[rows, cols]

    def row_sum_violation(self) -> float:
        """The largest deviation of a row sum from one."""
        return float(np.max(np.abs(self.S.sum(axis=1) - 1.)))
