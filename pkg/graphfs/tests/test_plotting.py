import matplotlib.pyplot as plt
import numpy as np
import pytest

import graphfs.plotting as plotting
from graphfs.errors import ShapeError
from graphfs.graph import SimilarityGraph


def test_plot_selection(db, small_report):
    ax = plotting.plot_selection(small_report.selection.F, db['blobs'].feature_names)
    assert len(ax.patches) == small_report.selection.F.size
    plt.close()


def test_plot_graph(small_report, db):
    X = db['blobs'].X[:, [0, 1]]
    ax = plotting.plot_graph(X, small_report.graph, labels=db['blobs'].labels)
    assert len(ax.collections) == 2
    with pytest.raises(ShapeError):
        plotting.plot_graph(db['blobs'].X[:, :3], small_report.graph)
    plt.close()


def test_plot_graph_empty():
    ax = plotting.plot_graph(np.zeros((3, 2)), SimilarityGraph(np.zeros((3, 3))))
    assert len(ax.collections) == 1
    plt.close()


@pytest.mark.parametrize("indices", [(0, 1), (4,)])
def test_plot_run(db, small_report, indices):
    axes = plotting.plot_run(db['blobs'].X, small_report.selection.F, indices, small_report.graph,
                             labels=db['blobs'].labels, feature_names=db['blobs'].feature_names)
    assert len(axes) == 2
    assert axes[1].get_xlabel() == db['blobs'].feature_names[indices[0]]
    plt.close()
