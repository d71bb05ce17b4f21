"""Plot the selection matrix and the learned graph of a run."""
import typing as tp

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.collections import LineCollection
from numpy import ndarray

from graphfs.errors import ShapeError
from graphfs.graph.config import SimilarityGraph


def plot_selection(F: ndarray, feature_names: tp.Sequence[str] = None, ax: plt.Axes = None, **kwargs) -> plt.Axes:
    """Plot the weights of each selected feature over the features as grouped bars."""
    if ax is None:
        ax = plt.gca()
    F = np.asarray(F)
    d, m = F.shape
    width = 0.8 / m
    x = np.arange(d)
    for j in range(m):
        ax.bar(x + (j - (m - 1) / 2.) * width, F[:, j], width=width, label="$f_{{{}}}$".format(j + 1), **kwargs)
    ax.set_xticks(x)
    if feature_names is not None:
        ax.set_xticklabels(feature_names, rotation=90)
    ax.set_xlabel("feature")
    ax.set_ylabel("weight")
    ax.legend()
    return ax


def plot_graph(
    points: ndarray, graph: SimilarityGraph, labels: ndarray = None, ax: plt.Axes = None,
    max_linewidth: float = 3., **kwargs
) -> plt.Axes:
    """Plot the samples on two features and the edges of the graph, thicker for higher similarity."""
    if ax is None:
        ax = plt.gca()
    points = np.asarray(points)
    if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] != graph.n:
        raise ShapeError("Expect {} points in two dimensions, got shape {}.".format(graph.n, points.shape))
    rows, cols, weights = graph.edges()
    if weights.size > 0:
        segments = np.stack([points[rows], points[cols]], axis=1)
        widths = max_linewidth * weights / weights.max()
        ax.add_collection(LineCollection(segments, linewidths=widths, colors="gray", alpha=0.6, zorder=1))
    kwargs.setdefault("s", 12)
    ax.scatter(points[:, 0], points[:, 1], c=labels, zorder=2, **kwargs)
    ax.set_aspect("equal", adjustable="datalim")
    return ax


def plot_run(
    X: ndarray, F: ndarray, indices: tp.Sequence[int], graph: SimilarityGraph, labels: ndarray = None,
    feature_names: tp.Sequence[str] = None, figure_config: dict = None
) -> tp.List[plt.Axes]:
    """Plot the selection matrix next to the graph over the first two selected features."""
    if figure_config is None:
        figure_config = {}
    figure_config.setdefault("figsize", (10, 4))
    fig, axes = plt.subplots(1, 2, **figure_config)
    plot_selection(F, feature_names, ax=axes[0])
    indices = list(indices)
    if len(indices) < 2:
        indices = indices * 2
    plot_graph(X[:, indices[:2]], graph, labels=labels, ax=axes[1])
    names = feature_names if feature_names is not None else ["f{}".format(i) for i in range(X.shape[1])]
    axes[1].set_xlabel(names[indices[0]])
    axes[1].set_ylabel(names[indices[1]])
    return list(axes)
