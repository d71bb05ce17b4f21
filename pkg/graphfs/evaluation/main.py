"""Evaluate a feature selection on the downstream tasks over several random splits."""
import typing as tp
from pathlib import Path

import numpy as np
import pandas as pd

from graphfs import io
from graphfs.datasets import Dataset, train_test_split
from graphfs.errors import ConfigError, DegenerateRowError
from graphfs.evaluation.metrics import kmeans, hungarian_align, knn_classify, reconstruction_rmse
from graphfs.evaluation.spectral import spectral_clustering
from graphfs.graph.config import GraphLearnerConfig
from graphfs.graph.energy import graph_quality
from graphfs.graph.learner import assemble_graph

__all__ = ["EvalReport", "evaluate_selection", "save_eval", "METRICS"]

METRICS = (
    "clustering_acc",
    "classification_acc",
    "reconstruction_rmse",
    "graph_inter_class_edge_fraction",
    "spectral_acc"
)


class EvalReport:
    """The metrics of a selection averaged over the seeds.

    Attributes
    ----------
    clustering_acc : float
        The accuracy of the k-means clusters of the test samples after the best matching with the classes.

    classification_acc : float
        The 1-NN accuracy on the test samples.

    reconstruction_rmse : float
        The error of reconstructing all the features of the test samples from the selected ones.

    graph_inter_class_edge_fraction : float
        The fraction of the edges of the hard k-NN graph of the test samples that join two classes.

    spectral_acc : float
        The accuracy of the spectral clusters of that graph after the best matching with the classes.

    std : dict
        The standard deviation of each metric over the seeds.

    meta : dict
        The selection, the seeds and the options of the evaluation.

    A disabled metric is None.
    """

    def __init__(
        self,
        clustering_acc: float = None,
        classification_acc: float = None,
        reconstruction_rmse: float = None,
        graph_inter_class_edge_fraction: float = None,
        spectral_acc: float = None,
        std: tp.Dict[str, float] = None,
        meta: dict = None
    ):
        self.clustering_acc = clustering_acc
        self.classification_acc = classification_acc
        self.reconstruction_rmse = reconstruction_rmse
        self.graph_inter_class_edge_fraction = graph_inter_class_edge_fraction
        self.spectral_acc = spectral_acc
        self.std = std if std is not None else {}
        self.meta = meta if meta is not None else {}

    def __repr__(self):
        return "EvalReport({})".format(", ".join("{}={}".format(name, getattr(self, name)) for name in METRICS))

    def to_dict(self) -> dict:
        dct = {name: getattr(self, name) for name in METRICS}
        dct["std"] = dict(self.std)
        dct["meta"] = dict(self.meta)
        return dct

    @classmethod
    def from_table(cls, table: pd.DataFrame, meta: dict = None) -> "EvalReport":
        """Aggregate the table of the seeds by the mean and the population standard deviation.

        The missing values of a metric are skipped. A metric missing on every seed is None.
        """
        means, stds = {}, {}
        for name in METRICS:
            if name in table.columns and table[name].notna().any():
                means[name] = float(table[name].mean())
                stds[name] = float(table[name].std(ddof=0))
        return cls(std=stds, meta=meta, **means)


def _check_selection(selected: tp.Sequence[int], d: int) -> tp.List[int]:
    selected = [int(i) for i in selected]
    if not selected:
        raise ConfigError("selection", "is empty.")
    bad = [i for i in selected if not 0 <= i < d]
    if bad:
        raise ConfigError("selection", "indices {} out of range for {} features.".format(bad, d))
    return selected


def _evaluate_seed(
    dataset: Dataset, selected: tp.List[int], seed: int, ratio: float, toggles: tp.Dict[str, bool], k: int,
    recon_epochs: int, verbose: int = 0
) -> dict:
    train_set, test_set = train_test_split(dataset, ratio=ratio, seed=seed)
    sel_train, sel_test = train_set.select_features(selected), test_set.select_features(selected)
    row = {"seed": seed}
    n_classes = int(np.unique(dataset.labels).size) if dataset.labels is not None else 0
    if toggles["clustering"]:
        pred = kmeans(sel_test.X, n_classes, seed=seed)
        row["clustering_acc"] = hungarian_align(pred, sel_test.labels)
    if toggles["classification"]:
        row["classification_acc"] = knn_classify(sel_train, sel_test, k=1)
    if toggles["reconstruction"]:
        row["reconstruction_rmse"] = reconstruction_rmse(train_set, test_set, selected, epochs=recon_epochs, seed=seed)
    if toggles["graph"]:
        cfg = GraphLearnerConfig(k=max(1, min(k, sel_test.n - 2)))
        try:
            graph = assemble_graph(sel_test.X, cfg, mode="hard")
        except DegenerateRowError as error:
            # duplicated test samples leave the graph undefined
            if verbose > 0:
                print("Seed {}: no graph metrics. {}".format(seed, error))
            row["graph_inter_class_edge_fraction"] = np.nan
            row["spectral_acc"] = np.nan
        else:
            row["graph_inter_class_edge_fraction"] = graph_quality(graph, sel_test.labels)
            row["spectral_acc"] = hungarian_align(
                spectral_clustering(graph, n_classes, seed=seed), sel_test.labels
            )
    return row


def evaluate_selection(
    dataset: Dataset,
    selected: tp.Sequence[int],
    seeds: tp.Iterable[int] = range(10),
    ratio: float = 0.8,
    clustering: bool = True,
    classification: bool = True,
    reconstruction: bool = True,
    graph: bool = True,
    k: int = 5,
    recon_epochs: int = 500,
    verbose: int = 0
) -> tp.Tuple[EvalReport, pd.DataFrame]:
    """Evaluate the selected features on random train and test splits and aggregate over the seeds.

    Parameters
    ----------
    dataset : Dataset
        The standardized data with all the features.

    selected : sequence of int
        The indices of the selected features.

    seeds : iterable of int
        One split per seed. The seed also fixes the k-means and the reconstruction network.

    ratio : float
        The training fraction of each split.

    clustering, classification, reconstruction, graph : bool
        Toggle the metrics. All but the reconstruction need labels.

    k : int
        The number of neighbors of the graph on the test samples.

    recon_epochs : int
        The number of training epochs of the reconstruction network.

    verbose : int
        1 prints the metrics of each seed.

    Returns
    -------
    report : EvalReport
        The mean and standard deviation of each metric.

    table : DataFrame
        One row per seed.
    """
    selected = _check_selection(selected, dataset.d)
    toggles = {
        "clustering": clustering, "classification": classification, "reconstruction": reconstruction,
        "graph": graph
    }
    if dataset.labels is None:
        needs = [name for name in ("clustering", "classification", "graph") if toggles[name]]
        if needs:
            raise ConfigError("labels", "the metrics {} need a labeled dataset.".format(needs))
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ConfigError("seeds", "give at least one seed.")
    rows = []
    for seed in seeds:
        row = _evaluate_seed(dataset, selected, seed, ratio, toggles, k, recon_epochs, verbose=verbose)
        if verbose > 0:
            print("Seed {}: {}".format(seed, ", ".join(
                "{} = {:.4f}".format(key, value) for key, value in row.items() if key != "seed")))
        rows.append(row)
    table = pd.DataFrame(rows)
    meta = {"selected": selected, "seeds": seeds, "ratio": ratio, "k": k, "recon_epochs": recon_epochs}
    meta.update(toggles)
    return EvalReport.from_table(table, meta=meta), table


def save_eval(report: EvalReport, table: pd.DataFrame, base_name: str, folder: str) -> tp.Tuple[Path, Path]:
    """Save the report in '{base_name}_eval.json' and the table of the seeds in '{base_name}_eval.csv'."""
    folder = Path(folder)
    folder.mkdir(parents=True, exist_ok=True)
    json_file = io.write_json(report.to_dict(), folder / "{}_eval.json".format(base_name))
    csv_file = io.write_csv(table, folder / "{}_eval.csv".format(base_name))
    return json_file, csv_file
