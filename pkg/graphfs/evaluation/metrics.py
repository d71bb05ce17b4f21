"""The downstream metrics of a feature selection: clustering, classification and reconstruction."""
import math
import typing as tp

import numpy as np
from numpy import ndarray
from scipy.optimize import linear_sum_assignment
from sklearn.cluster import KMeans
from sklearn.neighbors import KNeighborsClassifier

from graphfs.autodiff import ops
from graphfs.autodiff.tape import Tape
from graphfs.datasets import Dataset, make_rng
from graphfs.errors import ConfigError, ShapeError
from graphfs.training.optim import Adam

__all__ = ["kmeans", "wcss", "hungarian_align", "knn_classify", "reconstruction_rmse"]

KMEANS_MAX_ITER = 300
KMEANS_TOL = 1e-6


def _seed32(seed: int, stream: str) -> int:
    return int(make_rng(seed, stream).integers(2 ** 31 - 1))


def kmeans(X: ndarray, c: int, seed: int = 0, restarts: int = 10) -> ndarray:
    """Cluster the rows of X by Lloyd's algorithm from the k-means++ seeding, keeping the best of the restarts.

    Parameters
    ----------
    X : ndarray
        The n x d data.

    c : int
        The number of clusters, at most n.

    seed : int
        The random seed.

    restarts : int
        The number of seedings. The one with the lowest within-cluster sum of squares wins.

    Returns
    -------
    labels : ndarray
        The cluster of each row.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if not 1 <= c <= n:
        raise ConfigError("c", "must be in [1, {}], got {}.".format(n, c))
    if c == 1:
        return np.zeros(n, dtype=np.int64)
    model = KMeans(
        n_clusters=c, init="k-means++", n_init=restarts, max_iter=KMEANS_MAX_ITER, tol=KMEANS_TOL,
        random_state=_seed32(seed, "graphfs.evaluation.kmeans")
    )
    return model.fit_predict(X).astype(np.int64)


def wcss(X: ndarray, labels: ndarray) -> float:
    """The within-cluster sum of squares."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    total = 0.
    for label in np.unique(labels):
        members = X[labels == label]
        total += float(np.sum((members - members.mean(axis=0)) ** 2))
    return total


def hungarian_align(pred: ndarray, truth: ndarray) -> float:
    """The accuracy of the predicted clusters after the best one-to-one matching with the true classes."""
    pred, truth = np.asarray(pred), np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise ShapeError("Expect two label vectors of the same length, got {} and {}.".format(pred.shape, truth.shape))
    if pred.size == 0:
        return 0.
    pred_values, pred_idx = np.unique(pred, return_inverse=True)
    true_values, true_idx = np.unique(truth, return_inverse=True)
    confusion = np.zeros((pred_values.size, true_values.size))
    np.add.at(confusion, (pred_idx, true_idx), 1.)
    rows, cols = linear_sum_assignment(-confusion)
    return float(confusion[rows, cols].sum() / pred.size)


def knn_classify(train: Dataset, test: Dataset, k: int = 1) -> float:
    """The accuracy on the test samples of the majority vote of the k nearest training samples."""
    if train.labels is None or test.labels is None:
        raise ConfigError("labels", "the classification needs labeled datasets.")
    if train.d != test.d:
        raise ShapeError("The datasets have {} and {} features.".format(train.d, test.d))
    if not 1 <= k <= train.n:
        raise ConfigError("k", "must be in [1, {}], got {}.".format(train.n, k))
    model = KNeighborsClassifier(n_neighbors=k)
    model.fit(train.X, train.labels)
    return float(model.score(test.X, test.labels))


def _zscore(train: ndarray, test: ndarray) -> tp.Tuple[ndarray, ndarray]:
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    std[std == 0.] = 1.
    return (train - mean) / std, (test - mean) / std


def reconstruction_rmse(
    train: Dataset,
    test: Dataset,
    selected: tp.Sequence[int],
    hidden_mult: float = 1.5,
    epochs: int = 500,
    lr: float = 1e-3,
    seed: int = 0,
    skip: bool = True
) -> float:
    """The error of a one hidden layer ReLU network reconstructing all the features from the selected ones.

    The features are scaled to zero mean and unit variance by the training statistics. The network is trained
    by full-batch Adam on the mean squared error and evaluated on the test samples. With skip, the network
    also has a linear path from the inputs to the outputs that starts at the least squares fit, and the
    output weights of the hidden layer start at zero, so the training refines the best linear reconstruction.

    Parameters
    ----------
    train, test : Dataset
        The training and the testing samples with all the features.

    selected : sequence of int
        The indices of the input features.

    hidden_mult : float
        The hidden width is ceil(hidden_mult * m) for m selected features.

    epochs : int
        The number of Adam steps.

    lr : float
        The learning rate.

    seed : int
        The seed of the weights, drawn from N(0, 1 / fan_in).

    skip : bool
        If False, the network is the plain hidden layer with all its weights drawn at random.

    Returns
    -------
    rmse : float
        The square root of the sum of the squared errors divided by n_test * d.
    """
    selected = [int(i) for i in selected]
    if not selected:
        raise ConfigError("selected", "select at least one feature.")
    if any(not 0 <= i < train.d for i in selected):
        raise ConfigError("selected", "indices out of range for {} features.".format(train.d))
    x_train, x_test = _zscore(train.X, test.X)
    m, d = len(selected), train.d
    hidden = int(math.ceil(hidden_mult * m))
    rng = make_rng(seed, "graphfs.evaluation.reconstruction_rmse")
    inputs = x_train[:, selected]
    weights = [
        rng.normal(0., 1. / math.sqrt(m), size=(m, hidden)),
        np.zeros((1, hidden)),
        rng.normal(0., 1. / math.sqrt(hidden), size=(hidden, d)),
        np.zeros((1, d))
    ]
    if skip:
        design = np.concatenate([inputs, np.ones((inputs.shape[0], 1))], axis=1)
        linear = np.linalg.lstsq(design, x_train, rcond=None)[0]
        weights[2] = np.zeros((hidden, d))
        weights[3] = linear[-1:].copy()
        weights.append(linear[:-1].copy())
    optimizer = Adam(weights, lr)
    scale = 1. / (x_train.shape[0] * d)
    tape = Tape()
    for epoch in range(epochs):
        tape.clear()
        leaves = [tape.leaf(w) for w in weights]
        w1, b1, w2, b2 = leaves[:4]
        x = tape.constant(inputs)
        out = ops.matmul(ops.relu(ops.matmul(x, w1) + b1), w2) + b2
        if skip:
            out = out + ops.matmul(x, leaves[4])
        loss = ops.scale(ops.sum_all(ops.square(out - x_train)), scale)
        tape.backward(loss)
        optimizer.step([leaf.grad for leaf in leaves], epoch=epoch)
    w1, b1, w2, b2 = weights[:4]
    pred = np.maximum(x_test[:, selected] @ w1 + b1, 0.) @ w2 + b2
    if skip:
        pred = pred + x_test[:, selected] @ weights[4]
    return float(np.sqrt(np.sum((pred - x_test) ** 2) / (x_test.shape[0] * d)))
