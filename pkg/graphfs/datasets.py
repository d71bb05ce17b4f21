"""The datasets: synthetic toy data, standardization and splitting."""
import typing as tp
import zlib

import numpy as np
import pandas as pd
from numpy import ndarray
from numpy.random import Generator, Philox, SeedSequence
from sklearn.datasets import make_blobs, make_moons, make_circles

from graphfs.errors import ConfigError, ShapeError, EmptyDatasetError

__all__ = [
    "Dataset",
    "make_rng",
    "gen_synthetic",
    "standardize",
    "train_test_split",
    "KINDS",
    "N_FEATURES",
    "N_NOISE_FEATURES"
]

KINDS = ("blobs", "moons", "circles")
N_NOISE_FEATURES = 18
N_FEATURES = 2 + N_NOISE_FEATURES
SHAPE_NOISE = 0.1
BLOB_CENTERS = [(-2., -2.), (2., 2.)]
BLOB_STD = 0.5
CIRCLE_FACTOR = 0.5


def make_rng(seed: int, stream: str, *counters: int) -> Generator:
    """A counter-based random generator for a named stream.

    The state is derived from the user seed, the CRC-32 hash of the stream name and the optional counters
    (like the epoch), so every stream is reproducible on its own.

    Parameters
    ----------
    seed : int
        The non-negative user seed.

    stream : str
        The name of the stream, usually the module or the function that consumes it.

    counters : int
        Additional non-negative integers mixed into the seed.

    Returns
    -------
    rng : Generator
        A numpy generator on the Philox bit generator.
    """
    seed = int(seed)
    if seed < 0:
        raise ConfigError("seed", "must be non-negative, got {}.".format(seed))
    entropy = [seed, zlib.crc32(stream.encode("utf-8"))] + [int(c) for c in counters]
    return Generator(Philox(SeedSequence(entropy)))


class Dataset:
    """A data matrix with optional labels.

    Attributes
    ----------
    X : ndarray
        The n x d float64 data matrix. Each row is a sample.

    labels : ndarray or None
        The integer labels of the samples.

    feature_names : list of str
        The names of the d features.

    informative_indices : tuple of int or None
        The indices of the features that carry the structure. Only known for the synthetic data.

    index : ndarray
        The positions of the samples in the dataset they are taken from.

    dropped : tuple of int
        The indices of the constant features removed by the standardization.

    meta : dict
        The information about the origin of the data, like the kind, the size and the seed of a synthetic dataset.
    """

    def __init__(
        self,
        X: ndarray,
        labels: ndarray = None,
        feature_names: tp.Sequence[str] = None,
        informative_indices: tp.Sequence[int] = None,
        index: ndarray = None,
        dropped: tp.Sequence[int] = (),
        meta: dict = None
    ):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ShapeError("The data matrix must be two dimensional, got shape {}.".format(X.shape))
        n, d = X.shape
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
            if labels.shape != (n,):
                raise ShapeError("Expect {} labels, got shape {}.".format(n, labels.shape))
        if feature_names is None:
            feature_names = ["f{}".format(j) for j in range(d)]
        if len(feature_names) != d:
            raise ShapeError("Expect {} feature names, got {}.".format(d, len(feature_names)))
        self.X = X
        self.labels = labels
        self.feature_names = list(feature_names)
        self.informative_indices = tuple(informative_indices) if informative_indices is not None else None
        self.index = np.arange(n) if index is None else np.asarray(index, dtype=np.int64)
        self.dropped = tuple(dropped)
        self.meta = dict(meta) if meta else {}

    def __repr__(self):
        return "Dataset(n={}, d={}, labeled={})".format(self.n, self.d, self.labels is not None)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def subset(self, rows: tp.Sequence[int]) -> "Dataset":
        """A dataset of the samples at the rows."""
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(
            self.X[rows],
            labels=self.labels[rows] if self.labels is not None else None,
            feature_names=self.feature_names,
            informative_indices=self.informative_indices,
            index=self.index[rows],
            dropped=self.dropped,
            meta=self.meta
        )

    def select_features(self, indices: tp.Sequence[int]) -> "Dataset":
        """A dataset of the features at the indices."""
        indices = [int(i) for i in indices]
        for i in indices:
            if not 0 <= i < self.d:
                raise ConfigError("indices", "feature index {} is out of range for {} features.".format(i, self.d))
        return Dataset(
            self.X[:, indices],
            labels=self.labels,
            feature_names=[self.feature_names[i] for i in indices],
            index=self.index,
            meta=self.meta
        )

    def to_frame(self) -> pd.DataFrame:
        """The data as a data frame, with a 'label' column when labeled."""
        df = pd.DataFrame(self.X, columns=self.feature_names)
        if self.labels is not None:
            df["label"] = self.labels
        return df


def _shape(kind: str, n: int, random_state: int) -> tp.Tuple[ndarray, ndarray]:
    half = (n // 2, n // 2)
    if kind == "blobs":
        return make_blobs(
            n_samples=list(half), centers=BLOB_CENTERS, cluster_std=BLOB_STD, shuffle=False,
            random_state=random_state
        )
    if kind == "moons":
        return make_moons(n_samples=half, shuffle=False, random_state=random_state)
    return make_circles(n_samples=half, factor=CIRCLE_FACTOR, shuffle=False, random_state=random_state)


def gen_synthetic(kind: str, n: int = 600, seed: int = 0) -> Dataset:
    """Generate a two class toy dataset with two informative features and eighteen noise features.

    The first two features are the two dimensional shape with additional Gaussian noise of standard
    deviation 0.1. The other features are i.i.d. standard normal. The classes are balanced and the
    samples are shuffled.

    Parameters
    ----------
    kind : str
        "blobs" for two isotropic Gaussian clusters at (-2, -2) and (2, 2), "moons" for two interleaving
        half circles and "circles" for two concentric circles of radius 1 and 0.5.

    n : int
        The number of samples. At least 20 and even.

    seed : int
        The random seed.

    Returns
    -------
    dataset : Dataset
        The n x 20 dataset with binary labels and informative indices (0, 1).
    """
    if kind not in KINDS:
        raise ConfigError("kind", "unknown kind '{}'. Allowed: {}.".format(kind, ", ".join(KINDS)))
    n = int(n)
    if n < 20:
        raise ConfigError("n", "need at least 20 samples, got {}.".format(n))
    if n % 2 != 0:
        raise ConfigError("n", "two class datasets need an even number of samples, got {}.".format(n))
    rng = make_rng(seed, "graphfs.datasets.gen_synthetic", KINDS.index(kind))
    shape, labels = _shape(kind, n, int(rng.integers(2 ** 31 - 1)))
    shape = shape + rng.normal(0., SHAPE_NOISE, size=shape.shape)
    noise = rng.standard_normal((n, N_NOISE_FEATURES))
    X = np.concatenate([shape, noise], axis=1)
    perm = rng.permutation(n)
    return Dataset(
        X[perm],
        labels=labels[perm],
        informative_indices=(0, 1),
        meta={"kind": kind, "n": n, "seed": int(seed)}
    )


def standardize(d: Dataset) -> Dataset:
    """Remove the constant features and scale the others to zero mean and unit L2 norm.

    Parameters
    ----------
    d : Dataset
        The dataset with at least two samples.

    Returns
    -------
    dataset : Dataset
        The standardized dataset. The indices of the removed features are in its 'dropped' attribute, counted
        in the columns of the input.
    """
    if d.n < 2:
        raise ShapeError("Need at least two samples to standardize, got {}.".format(d.n))
    constant = np.all(d.X == d.X[0], axis=0)
    kept = np.flatnonzero(~constant)
    if kept.size == 0:
        raise EmptyDatasetError("All the {} features are constant.".format(d.d))
    X = d.X[:, kept]
    X = X - X.mean(axis=0)
    X = X / np.sqrt(np.sum(X * X, axis=0))
    position = {int(old): new for new, old in enumerate(kept)}
    informative = None
    if d.informative_indices is not None:
        informative = [position[i] for i in d.informative_indices if i in position]
    return Dataset(
        X,
        labels=d.labels,
        feature_names=[d.feature_names[i] for i in kept],
        informative_indices=informative,
        index=d.index,
        dropped=[int(i) for i in np.flatnonzero(constant)],
        meta=d.meta
    )


def train_test_split(d: Dataset, ratio: float = 0.8, seed: int = 0) -> tp.Tuple[Dataset, Dataset]:
    """Shuffle the samples and split them into a training and a testing dataset.

    Parameters
    ----------
    d : Dataset
        The dataset to split.

    ratio : float
        The fraction of samples in the training dataset, strictly between 0 and 1.

    seed : int
        The random seed of the shuffle.

    Returns
    -------
    train : Dataset
        The training samples.

    test : Dataset
        The testing samples.
    """
    if not 0. < ratio < 1.:
        raise ConfigError("ratio", "must be in (0, 1), got {}.".format(ratio))
    if d.n < 2:
        raise ShapeError("Need at least two samples to split, got {}.".format(d.n))
    n_train = min(max(int(round(ratio * d.n)), 1), d.n - 1)
    perm = make_rng(seed, "graphfs.datasets.train_test_split").permutation(d.n)
    return d.subset(perm[:n_train]), d.subset(perm[n_train:])
