"""The full-batch training of the feature selector and the graph learner by the Dirichlet energy."""
import time
import typing as tp

import numpy as np
import pandas as pd
from numpy import ndarray

from graphfs.autodiff import ops
from graphfs.autodiff.tape import Tape, Var
from graphfs.datasets import Dataset, train_test_split
from graphfs.errors import DegenerateRowError, ConfigError
from graphfs.graph.config import SimilarityGraph
from graphfs.graph.energy import heat_kernel_graph, laplacian_var
from graphfs.graph.learner import assemble_graph, learn_graph_var
from graphfs.selection import (
    UfsParams, anneal_temperature, sample_gumbel, relaxed_selection, orthogonalize_var, soft_selection,
    orthogonalize_practical, hard_selection, SelectionResult
)
from graphfs.training.config import TrainConfig, TrainReport, HEAT_SIGMAS
from graphfs.training.optim import AdamState, adam_step

__all__ = [
    "loss_forward",
    "selection_var",
    "final_selection",
    "selected_graph",
    "train",
    "grid_search",
    "LR_GRID",
    "GAMMA_GRID",
    "K_GRID"
]

LR_GRID = (1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1)
GAMMA_GRID = (1e-3, 1e-2, 1e-1)
K_GRID = (1, 2, 3, 4, 5)


def _params(d: int, cfg: TrainConfig) -> UfsParams:
    return UfsParams.init(d, cfg.m, seed=cfg.seed, epsilon=cfg.epsilon, t0=cfg.t0, t_min=cfg.t_min,
                          epochs_total=cfg.epochs)


def selection_var(theta: Var, params: UfsParams, cfg: TrainConfig, epoch: int, noise: bool = True) -> Var:
    """The selection matrix on the tape: the relaxed selection, de-duplicated unless the ablation skips it."""
    temperature = anneal_temperature(epoch, params)
    gumbel = sample_gumbel(params.d, params.m, cfg.seed, epoch) if noise else 0.
    fhat = relaxed_selection(theta, gumbel, temperature)
    if cfg.ablation == "no_ufs":
        return fhat
    return orthogonalize_var(fhat, cfg.epsilon)


def loss_forward(
    X: ndarray, theta: Var, params: UfsParams, cfg: TrainConfig, epoch: int,
    fixed_laplacian: ndarray = None, noise: bool = True
) -> Var:
    """The Dirichlet energy tr(Xs.T @ L @ Xs) of the selected data Xs = X @ F on its learned graph.

    Parameters
    ----------
    X : ndarray
        The n x d standardized data.

    theta : Var
        The d x m logits on the tape.

    params : UfsParams
        The constants of the selector.

    cfg : TrainConfig
        The configuration of the run.

    epoch : int
        The epoch, which fixes the temperature and the Gumbel noise.

    fixed_laplacian : ndarray
        If given, this Laplacian is used instead of the learned one.

    noise : bool
        If False, the Gumbel noise is zero.

    Returns
    -------
    loss : Var
        The 1 x 1 loss.
    """
    F = selection_var(theta, params, cfg, epoch, noise=noise)
    xhat = ops.matmul(theta.tape.constant(X), F)
    if fixed_laplacian is not None:
        return ops.quad_trace(xhat, fixed_laplacian)
    source = ops.detach(xhat) if cfg.detach_graph else xhat
    s = learn_graph_var(source, cfg.graph_config(), epoch=epoch)
    return ops.quad_trace(xhat, laplacian_var(s))


def final_selection(params: UfsParams, cfg: TrainConfig) -> SelectionResult:
    """The selection of the logits at the last temperature without noise."""
    fhat = soft_selection(params, params.epochs_total - 1, cfg.seed, noise=False)
    F = fhat if cfg.ablation == "no_ufs" else orthogonalize_practical(fhat, cfg.epsilon)[0]
    return hard_selection(F)


def selected_graph(X: ndarray, indices: tp.Sequence[int], cfg: TrainConfig) -> SimilarityGraph:
    """The k-NN graph learned by the exact sorting on the selected features."""
    return assemble_graph(X[:, list(indices)], cfg.graph_config(), mode="hard")


def _fixed_laplacian(X: ndarray, cfg: TrainConfig, sigma: float) -> ndarray:
    return heat_kernel_graph(X, sigma, cfg.k).laplacian


def _tune_sigma(dataset: Dataset, cfg: TrainConfig, verbose: int) -> float:
    """Pick the bandwidth whose run ends with the lowest loss per unit of total edge weight."""
    scores = []
    for sigma in HEAT_SIGMAS:
        report = train(dataset, cfg.replace(heat_sigma=sigma), verbose=0)
        weight = heat_kernel_graph(dataset.X, sigma, cfg.k).S.sum()
        scores.append(report.final_loss / weight)
        if verbose > 0:
            print("sigma = {:g}: normalized loss = {:.6g}".format(sigma, scores[-1]))
    return HEAT_SIGMAS[int(np.argmin(scores))]


def train(dataset: Dataset, cfg: TrainConfig, verbose: int = 0) -> TrainReport:
    """Learn the selection and the graph by minimizing the Dirichlet energy with Adam.

    Each epoch records the loss on a fresh tape generation, back-propagates to the logits and takes one Adam
    step. The temperature decreases geometrically and the Gumbel noise is drawn again every epoch.

    Parameters
    ----------
    dataset : Dataset
        The standardized data.

    cfg : TrainConfig
        The configuration of the run.

    verbose : int
        0 is quiet, 1 prints the loss every 'log_every' epochs and a summary, 2 also prints the residual of the
        de-duplication.

    Returns
    -------
    report : TrainReport
        The losses, the final selection and the final hard graph.
    """
    X = dataset.X
    cfg.validate(d=dataset.d, n=dataset.n)
    if cfg.ablation == "fixed_heat_graph" and cfg.heat_sigma == "tune":
        sigma = _tune_sigma(dataset, cfg, verbose)
        if verbose > 0:
            print("Use sigma = {:g}.".format(sigma))
        report = train(dataset, cfg.replace(heat_sigma=sigma), verbose=verbose)
        report.config = cfg.to_dict()
        report.config["heat_sigma"] = sigma
        return report
    start = time.perf_counter()
    params = _params(dataset.d, cfg)
    state = AdamState.zeros(params.theta.shape)
    fixed = _fixed_laplacian(X, cfg, cfg.heat_sigma) if cfg.ablation == "fixed_heat_graph" else None
    losses = np.zeros(cfg.epochs)
    tape = Tape()
    if verbose > 0:
        print("Start training: {} samples, {} features, select {}.".format(dataset.n, dataset.d, cfg.m))
    for epoch in range(cfg.epochs):
        tape.clear()
        theta = tape.leaf(params.theta, name="theta")
        try:
            loss = loss_forward(X, theta, params, cfg, epoch, fixed_laplacian=fixed)
        except DegenerateRowError as e:
            raise e.at_epoch(epoch)
        tape.backward(loss)
        grad = theta.grad if theta.grad is not None else np.zeros(params.theta.shape)
        params.theta, state = adam_step(params.theta, grad, state, cfg.lr, epoch=epoch)
        losses[epoch] = loss.item()
        if verbose > 0 and (epoch % cfg.log_every == 0 or epoch == cfg.epochs - 1):
            print("Epoch {} / {}: loss = {:.6g}, T = {:.4g}".format(
                epoch + 1, cfg.epochs, losses[epoch], anneal_temperature(epoch, params)))
    selection = final_selection(params, cfg)
    graph = selected_graph(X, selection.hard_indices, cfg)
    if verbose > 1 and cfg.ablation != "no_ufs":
        fhat = soft_selection(params, params.epochs_total - 1, cfg.seed, noise=False)
        F, factor = orthogonalize_practical(fhat, cfg.epsilon)
        inv = np.linalg.inv(factor.lower)
        residual = np.max(np.abs(F.T @ F - (np.eye(cfg.m) - cfg.epsilon * inv @ inv.T)))
        print("Gram identity residual: {:.3e}".format(residual))
    wall_time = time.perf_counter() - start
    if verbose > 0:
        print("Selected features: {}{}. Final loss = {:.6g}. Time: {:.1f} s.".format(
            list(selection.hard_indices), " (duplicates)" if selection.duplicates else "", losses[-1], wall_time))
    return TrainReport(losses, selection, graph, params.theta, wall_time, cfg.to_dict())


def _validation_accuracy(train_set: Dataset, val_set: Dataset, indices: tp.Sequence[int]) -> float:
    from graphfs.evaluation.metrics import knn_classify
    return knn_classify(train_set.select_features(indices), val_set.select_features(indices), k=1)


def grid_search(
    dataset: Dataset,
    base_cfg: TrainConfig,
    lrs: tp.Sequence[float] = LR_GRID,
    gammas: tp.Sequence[float] = GAMMA_GRID,
    ks: tp.Sequence[int] = K_GRID,
    select_by: str = "loss",
    ratio: float = 0.8,
    verbose: int = 0
) -> tp.Tuple[TrainConfig, pd.DataFrame]:
    """Train on every combination of the learning rate, gamma and k and pick the best configuration.

    Parameters
    ----------
    dataset : Dataset
        The standardized data.

    base_cfg : TrainConfig
        The configuration of the other options.

    lrs, gammas, ks : sequence
        The grids.

    select_by : str
        "loss" picks the lowest final loss. "classification" trains on a split of the data and picks the
        highest 1-NN accuracy of the selected features on the held out samples, which needs labels.

    ratio : float
        The training fraction of the split used by "classification".

    verbose : int
        The verbose level passed to the runs.

    Returns
    -------
    best : TrainConfig
        The best configuration.

    table : DataFrame
        One row per configuration with the score and the selected features.
    """
    if select_by not in ("loss", "classification"):
        raise ConfigError("select_by", "unknown '{}'. Allowed: 'loss', 'classification'.".format(select_by))
    if select_by == "classification":
        if dataset.labels is None:
            raise ConfigError("select_by", "classification needs labels.")
        fit_set, val_set = train_test_split(dataset, ratio=ratio, seed=base_cfg.seed)
    else:
        fit_set, val_set = dataset, None
    rows = []
    configs = []
    for lr in lrs:
        for gamma in gammas:
            for k in ks:
                cfg = base_cfg.replace(lr=lr, gamma=gamma, k=k)
                try:
                    report = train(fit_set, cfg, verbose=verbose)
                except (DegenerateRowError, ArithmeticError) as e:
                    if verbose > 0:
                        print("Skip lr = {:g}, gamma = {:g}, k = {}: {}".format(lr, gamma, k, e))
                    continue
                indices = report.selection.hard_indices
                if select_by == "loss":
                    score = -report.final_loss
                else:
                    score = _validation_accuracy(fit_set, val_set, indices)
                rows.append({
                    "lr": lr, "gamma": gamma, "k": k, "score": score, "final_loss": report.final_loss,
                    "hard_indices": list(indices), "duplicates": report.selection.duplicates
                })
                configs.append(cfg)
    if not rows:
        raise ConfigError("grid", "no configuration of the grid could be trained.")
    table = pd.DataFrame(rows)
    best = int(np.argmax(table["score"].to_numpy()))
    return configs[best], table
