"""Spectral clustering on a learned graph and the Laplacian score baseline."""
import typing as tp

import numpy as np
from numpy import ndarray

from graphfs import linalg
from graphfs.datasets import Dataset
from graphfs.errors import ConfigError
from graphfs.evaluation.metrics import kmeans
from graphfs.graph.config import SimilarityGraph
from graphfs.graph.energy import heat_kernel_graph

__all__ = [
    "spectral_embedding",
    "spectral_clustering",
    "laplacian_scores",
    "laplacian_score_rank",
    "top_features",
    "JACOBI_MAX_NODES"
]

JACOBI_MAX_NODES = 64


def spectral_embedding(graph: SimilarityGraph, c: int) -> ndarray:
    """The eigenvectors of the c smallest eigenvalues of the Laplacian of the symmetrized graph, as columns.

    Graphs up to JACOBI_MAX_NODES nodes are decomposed by the Jacobi rotations, larger ones by LAPACK.
    """
    if not 1 <= c <= graph.n:
        raise ConfigError("c", "must be in [1, {}], got {}.".format(graph.n, c))
    if graph.n <= JACOBI_MAX_NODES:
        vectors = linalg.jacobi_eigh(graph.laplacian).eigenvectors
    else:
        _, vectors = np.linalg.eigh(graph.laplacian)
    return vectors[:, :c]


def spectral_clustering(graph: SimilarityGraph, c: int, seed: int = 0, restarts: int = 10) -> ndarray:
    """Cluster the nodes of a graph by k-means on its spectral embedding.

    Parameters
    ----------
    graph : SimilarityGraph
        The graph.

    c : int
        The number of clusters.

    seed : int
        The seed of the k-means.

    restarts : int
        The number of k-means seedings.

    Returns
    -------
    labels : ndarray
        The cluster of each node.
    """
    return kmeans(spectral_embedding(graph, c), c, seed=seed, restarts=restarts)


def laplacian_scores(dataset: Dataset, sigma: float = 1., k: int = 5, normalize: bool = False) -> ndarray:
    """The smoothness of every feature on the heat kernel graph of all the features.

    Parameters
    ----------
    dataset : Dataset
        The standardized data.

    sigma : float
        The bandwidth of the heat kernel.

    k : int
        The number of neighbors of the heat kernel graph.

    normalize : bool
        If False, the score of the feature x is x.T @ L @ x. If True, x is first centered by the degree weighted
        mean and the score is divided by x.T @ D @ x, with D the degree matrix.

    Returns
    -------
    scores : ndarray
        One score per feature. The lower, the smoother.
    """
    graph = heat_kernel_graph(dataset.X, sigma, k)
    lap = graph.laplacian
    X = dataset.X
    if not normalize:
        return np.einsum("ij,ij->j", X, lap @ X)
    degree = np.diag(lap)
    centered = X - (degree @ X) / degree.sum()
    num = np.einsum("ij,ij->j", centered, lap @ centered)
    den = np.einsum("i,ij->j", degree, centered ** 2)
    return np.where(den > 0., num / np.where(den > 0., den, 1.), np.inf)


def laplacian_score_rank(dataset: Dataset, sigma: float = 1., k: int = 5, normalize: bool = False) -> ndarray:
    """The features ordered from the smoothest to the roughest on the heat kernel graph, the lowest index on
    ties."""
    return np.argsort(laplacian_scores(dataset, sigma, k, normalize=normalize), kind="stable")


def top_features(dataset: Dataset, m: int, sigma: float = 1., k: int = 5) -> tp.List[int]:
    """The m features of the lowest Laplacian scores."""
    if not 1 <= m <= dataset.d:
        raise ConfigError("m", "must be in [1, {}], got {}.".format(dataset.d, m))
    return [int(i) for i in laplacian_score_rank(dataset, sigma, k)[:m]]
