"""The smoothness of signals on graphs and the fixed graphs used as baselines."""
import typing as tp

import numpy as np
from numpy import ndarray

from graphfs import linalg
from graphfs.autodiff.tape import Var
from graphfs.datasets import make_rng
from graphfs.errors import ConfigError, ShapeError
from graphfs.graph.config import GraphLearnerConfig, SimilarityGraph, laplacian
from graphfs.graph.learner import assemble_graph

__all__ = [
    "laplacian",
    "laplacian_var",
    "dirichlet_energy",
    "pairwise_energy",
    "heat_kernel_graph",
    "graph_quality",
    "random_knn_graph",
    "BubbleExample",
    "two_bubble_graph"
]


def laplacian_var(s: Var) -> Var:
    """The tape version of the Laplacian of the symmetrized similarity."""
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ShapeError("The similarity must be square, got shape {}.".format(s.shape))

    def vjp(g):
        grad_sym = np.diag(g)[:, None] - g
        return ((grad_sym + grad_sym.T) / 2.,)

    return s.tape.record("laplacian", laplacian(s.value), (s,), vjp)


def _as_signal(v: ndarray, n: int) -> ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim == 1:
        v = v[:, None]
    if v.ndim != 2 or v.shape[0] != n:
        raise ShapeError("Expect a signal with {} rows, got shape {}.".format(n, v.shape))
    return v


def dirichlet_energy(lap: ndarray, v: ndarray) -> float:
    """The smoothness tr(V.T @ L @ V) of the columns of V on the graph of the Laplacian L."""
    lap = linalg.as_matrix(lap, "Laplacian")
    v = _as_signal(v, lap.shape[0])
    return float(np.sum(v * (lap @ v)))


def pairwise_energy(s: ndarray, v: ndarray) -> float:
    """The smoothness as the weighted sum 1/2 sum_ij s_ij |v_i - v_j|^2 over the symmetrized similarity."""
    s = linalg.as_matrix(s, "similarity")
    v = _as_signal(v, s.shape[0])
    sym = (s + s.T) / 2.
    return float(0.5 * np.sum(sym * linalg.pairwise_sq_dists(v)))


def _nearest(E: ndarray, k: int) -> ndarray:
    """The indices of the k nearest other samples of each sample, the lowest index on ties."""
    n = E.shape[0]
    if not 1 <= k <= n - 1:
        raise ConfigError("k", "must be in [1, {}], got {}.".format(n - 1, k))
    masked = E.copy()
    np.fill_diagonal(masked, np.inf)
    return np.argsort(masked, axis=1, kind="stable")[:, :k]


def heat_kernel_graph(X: ndarray, sigma: float, k: int) -> SimilarityGraph:
    """The heat kernel similarities exp(-|x_i - x_j|^2 / (2 sigma^2)) kept on the k nearest neighbors.

    Parameters
    ----------
    X : ndarray
        The n x d data.

    sigma : float
        The positive bandwidth.

    k : int
        The number of neighbors kept in each row.

    Returns
    -------
    graph : SimilarityGraph
        The sparsified graph. Its Laplacian is built on the symmetrized similarity.
    """
    if not sigma > 0.:
        raise ConfigError("sigma", "must be positive, got {}.".format(sigma))
    E = linalg.pairwise_sq_dists(X)
    idx = _nearest(E, k)
    rows = np.arange(E.shape[0])[:, None]
    s = np.zeros_like(E)
    s[rows, idx] = np.exp(-E[rows, idx] / (2. * sigma ** 2))
    return SimilarityGraph(s)


def graph_quality(graph: SimilarityGraph, labels: ndarray) -> float:
    """The fraction of the directed edges that join samples of different classes."""
    labels = np.asarray(labels)
    if labels.shape != (graph.n,):
        raise ShapeError("Expect {} labels, got shape {}.".format(graph.n, labels.shape))
    rows, cols, _ = graph.edges()
    if rows.size == 0:
        return 0.
    return float(np.mean(labels[rows] != labels[cols]))


def random_knn_graph(n: int, k: int, seed: int) -> SimilarityGraph:
    """A graph where each sample links to k other samples drawn at random, with the weights 1 / k."""
    if not 1 <= k <= n - 1:
        raise ConfigError("k", "must be in [1, {}], got {}.".format(n - 1, k))
    rng = make_rng(seed, "graphfs.graph.energy.random_knn_graph")
    s = np.zeros((n, n))
    for i in range(n):
        others = np.delete(np.arange(n), i)
        s[i, rng.choice(others, size=k, replace=False)] = 1. / k
    return SimilarityGraph(s)


class BubbleExample:
    """Two clusters of points with their learned 2-NN graph and the signals compared on it.

    Attributes
    ----------
    points : ndarray
        The n x 2 coordinates.

    labels : ndarray
        The cluster of each point.

    graph : SimilarityGraph
        The hard 2-NN graph learned from the coordinates.

    matched_signal : ndarray
        The standardized coordinates.

    random_signal : ndarray
        A standardized i.i.d. standard normal signal of the same shape.

    random_graph : SimilarityGraph
        A random 2-NN graph over the same points.
    """

    def __init__(
        self, points: ndarray, labels: ndarray, graph: SimilarityGraph, matched_signal: ndarray,
        random_signal: ndarray, random_graph: SimilarityGraph
    ):
        self.points = points
        self.labels = labels
        self.graph = graph
        self.matched_signal = matched_signal
        self.random_signal = random_signal
        self.random_graph = random_graph

    def energies(self) -> tp.Dict[str, float]:
        """The energy of the matched pair and of the two mismatched pairs."""
        return {
            "matched": dirichlet_energy(self.graph.laplacian, self.matched_signal),
            "random_signal": dirichlet_energy(self.graph.laplacian, self.random_signal),
            "random_graph": dirichlet_energy(self.random_graph.laplacian, self.matched_signal)
        }


def _unit(v: ndarray) -> ndarray:
    v = v - v.mean(axis=0)
    return v / np.sqrt(np.sum(v * v, axis=0))


def two_bubble_graph(seed: int, n_per_bubble: int = 10, spread: float = 0.3) -> BubbleExample:
    """Build two round clusters at (-1, 0) and (1, 0), their 2-NN graph and the signals to compare.

    Parameters
    ----------
    seed : int
        The random seed.

    n_per_bubble : int
        The number of points in each cluster.

    spread : float
        The standard deviation of the points around the centers.

    Returns
    -------
    example : BubbleExample
        The points, the graphs and the signals.
    """
    rng = make_rng(seed, "graphfs.graph.energy.two_bubble_graph")
    centers = np.repeat(np.array([[-1., 0.], [1., 0.]]), n_per_bubble, axis=0)
    points = centers + rng.normal(0., spread, size=centers.shape)
    labels = np.repeat([0, 1], n_per_bubble)
    graph = assemble_graph(points, GraphLearnerConfig(k=2), mode="hard")
    return BubbleExample(
        points,
        labels,
        graph,
        _unit(points),
        _unit(rng.standard_normal(points.shape)),
        random_knn_graph(points.shape[0], 2, seed)
    )
