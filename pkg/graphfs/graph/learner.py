"""The k-NN graph learner: from the distances between the samples to the closed-form graph weights."""
import itertools
import typing as tp

import numpy as np
from numpy import ndarray

from graphfs import linalg
from graphfs.autodiff import ops
from graphfs.autodiff.tape import Var
from graphfs.errors import DegenerateRowError, ShapeError, ConfigError
from graphfs.graph.config import GraphLearnerConfig, SelectorPair, SimilarityGraph
from graphfs.graph.transport import build_cost, sinkhorn_bregman, sinkhorn_var, extract_selectors, exact_selectors

__all__ = [
    "distance_row",
    "distance_rows",
    "candidate_count",
    "nearest_candidates",
    "graph_row_weights",
    "assemble_graph",
    "graph_from_distances",
    "learn_graph_var",
    "alpha_max",
    "simplex_row_solution",
    "DENOMINATOR_FLOOR"
]

DENOMINATOR_FLOOR = 1e-12
MAX_EXHAUSTIVE = 12


def _check_spread(off: ndarray, rows: tp.Sequence[int] = None) -> None:
    """Raise on the first row whose off-diagonal distances are all equal."""
    spread = off.max(axis=-1) - off.min(axis=-1)
    bad = np.flatnonzero(spread <= 0.)
    if bad.size > 0:
        row = bad[0] if rows is None else rows[bad[0]]
        raise DegenerateRowError(int(row), "all the distances are equal")


def _check_nearest(gap: ndarray, rows: tp.Sequence[int] = None, epoch: int = None) -> None:
    bad = np.flatnonzero(np.ravel(gap) <= 0.)
    if bad.size > 0:
        row = bad[0] if rows is None else rows[bad[0]]
        raise DegenerateRowError(int(row), "the k + 1 nearest distances are all equal", epoch=epoch)


def _row_bounds(off: ndarray, cfg: GraphLearnerConfig, rows: tp.Sequence[int] = None) -> tp.Tuple[ndarray, ndarray]:
    """The distances mapped to 0 and to the span of the rescaled rows."""
    if cfg.scaling == "max":
        return np.zeros((off.shape[0], 1)), off.max(axis=1, keepdims=True)
    part = np.partition(off, (0, cfg.k), axis=1)
    lo, hi = part[:, :1], part[:, cfg.k:cfg.k + 1]
    _check_nearest(hi - lo, rows)
    return lo, hi


def _span(cfg: GraphLearnerConfig) -> float:
    return float(cfg.k) if cfg.scaling == "knn" else 1.


def distance_rows(E: ndarray, cfg: GraphLearnerConfig) -> ndarray:
    """All the distance rows with the self distances masked. See distance_row."""
    E = linalg.as_matrix(E, "distance matrix")
    n = E.shape[0]
    if E.shape[1] != n:
        raise ShapeError("The distance matrix must be square, got shape {}.".format(E.shape))
    cfg.validate(n)
    eye = np.eye(n, dtype=bool)
    off = E[~eye].reshape(n, n - 1)
    _check_spread(off)
    e = np.where(eye, 0., E)
    if cfg.rescale_rows:
        lo, hi = _row_bounds(off, cfg)
        e = (e - lo) / (hi - lo) * _span(cfg)
    return np.where(eye, cfg.diag_mask, e)


def distance_row(E: ndarray, i: int, cfg: GraphLearnerConfig) -> ndarray:
    """The i-th distance row prepared for the top-k selection.

    The self distance is replaced by the mask. If the rows are rescaled, the other entries are mapped by
    the affine map of the scaling: with "knn" the nearest entry goes to 0 and the (k + 1)-th nearest to k,
    with "max" the entries are divided by their maximum and lie in [0, 1].

    Parameters
    ----------
    E : ndarray
        The n x n squared distances.

    i : int
        The row.

    cfg : GraphLearnerConfig
        The configuration of the mask and the rescaling.

    Returns
    -------
    e_row : ndarray
        The row of length n.
    """
    E = linalg.as_matrix(E, "distance matrix")
    n = E.shape[0]
    if not 0 <= i < n:
        raise ShapeError("Row {} is out of range for {} samples.".format(i, n))
    cfg.validate(n)
    row = E[i].copy()
    off = np.delete(row, i)[None, :]
    _check_spread(off, rows=[i])
    row[i] = 0.
    if cfg.rescale_rows:
        lo, hi = _row_bounds(off, cfg, rows=[i])
        row = (row - lo[0]) / (hi[0] - lo[0]) * _span(cfg)
    row[i] = cfg.diag_mask
    return row


def candidate_count(n: int, cfg: GraphLearnerConfig) -> int:
    """The length of the rows given to the transport: n for the whole row, else the number of candidates."""
    if cfg.candidates is None:
        return n
    count = max(cfg.candidates, cfg.k + 2)
    return count if count < n else n


def nearest_candidates(vals: ndarray, count: int) -> ndarray:
    """The columns of the count smallest entries of each row in the increasing order, equal entries by column.

    Parameters
    ----------
    vals : ndarray
        The n x n distances. The self distances must be masked by inf or a large value.

    count : int
        The number of candidates, below n.

    Returns
    -------
    idx : ndarray
        The n x count column indices.
    """
    idx = np.argpartition(vals, count - 1, axis=1)[:, :count]
    order = np.lexsort((idx, np.take_along_axis(vals, idx, axis=1)), axis=1)
    return np.take_along_axis(idx, order, axis=1)


def _masked_for_candidates(e: ndarray) -> ndarray:
    n = e.shape[0]
    return np.where(np.eye(n, dtype=bool), np.inf, e)


def _soft_selectors(e: ndarray, cfg: GraphLearnerConfig) -> SelectorPair:
    n, k = e.shape[0], cfg.k
    count = candidate_count(n, cfg)
    if count == n:
        return extract_selectors(sinkhorn_bregman(build_cost(e, k), k, cfg.gamma, cfg.zeta), k)
    cand = nearest_candidates(_masked_for_candidates(e), count)
    ec = np.take_along_axis(e, cand, axis=1)
    sel = extract_selectors(sinkhorn_bregman(build_cost(ec, k), k, cfg.gamma, cfg.zeta), k)
    delta, xi = np.zeros_like(e), np.zeros_like(e)
    np.put_along_axis(delta, cand, sel.delta, axis=1)
    np.put_along_axis(xi, cand, sel.xi, axis=1)
    return SelectorPair(delta, xi, hard=False)


def graph_row_weights(e_row: ndarray, sel: SelectorPair, k: int, row: int = None) -> ndarray:
    """The closed-form k-NN weights of distance rows.

    With the sums e.xi and e.delta, the weight of entry j is ((e.xi - e_j) / (k * e.xi - e.delta))+. With hard
    selectors the k nearest entries get positive weights summing to one.

    Parameters
    ----------
    e_row : ndarray
        The distance row, or a stack of rows.

    sel : SelectorPair
        The selectors of the rows.

    k : int
        The number of neighbors.

    row : int
        The index of a single row, reported in the errors.

    Returns
    -------
    s_row : ndarray
        The non-negative weights.
    """
    e_row = np.asarray(e_row, dtype=np.float64)
    if sel.delta.shape != e_row.shape:
        raise ShapeError("The selectors of shape {} do not fit the row of shape {}.".format(
            sel.delta.shape, e_row.shape))
    e_xi = np.sum(e_row * sel.xi, axis=-1, keepdims=True)
    e_delta = np.sum(e_row * sel.delta, axis=-1, keepdims=True)
    den = k * e_xi - e_delta
    _check_denominator(den[..., 0], row)
    return np.maximum((e_xi - e_row) / den, 0.)


def _check_denominator(den: ndarray, row: int = None, epoch: int = None) -> None:
    bad = np.flatnonzero(np.ravel(den) <= DENOMINATOR_FLOOR)
    if bad.size > 0:
        where = row if np.ndim(den) == 0 else int(bad[0])
        raise DegenerateRowError(where, "the k + 1 nearest distances are all equal", epoch=epoch)


def graph_from_distances(E: ndarray, cfg: GraphLearnerConfig, mode: str = "soft") -> SimilarityGraph:
    """Learn the graph from the squared distances between the samples.

    Parameters
    ----------
    E : ndarray
        The n x n squared distances.

    cfg : GraphLearnerConfig
        The configuration of the learner.

    mode : str
        "soft" selects the neighbors by the entropic transport and "hard" by the exact sorting.

    Returns
    -------
    graph : SimilarityGraph
        The graph. Its rows sum to one in the hard mode and to about one in the soft mode.
    """
    e = distance_rows(E, cfg)
    if mode == "soft":
        sel = _soft_selectors(e, cfg)
    elif mode == "hard":
        sel = exact_selectors(e, cfg.k)
    else:
        raise ValueError("Unknown mode: {}. Allowed: 'soft', 'hard'.".format(mode))
    return SimilarityGraph(graph_row_weights(e, sel, cfg.k))


def assemble_graph(xhat: ndarray, cfg: GraphLearnerConfig, mode: str = "soft") -> SimilarityGraph:
    """Learn the k-NN graph of the samples in the rows of the selected data xhat. See graph_from_distances."""
    return graph_from_distances(linalg.pairwise_sq_dists(xhat), cfg, mode=mode)


def _rescale_var(dist: Var, cfg: GraphLearnerConfig, eye: ndarray, epoch: int = None) -> Var:
    e = ops.set_masked(dist, eye, 0.)
    if not cfg.rescale_rows:
        return e
    if cfg.scaling == "max":
        return ops.divide(e, ops.row_max(e))
    bounds = np.argpartition(np.where(eye, np.inf, dist.value), (0, cfg.k), axis=1)[:, [0, cfg.k]]
    lo = ops.take_along_rows(dist, bounds[:, :1])
    hi = ops.take_along_rows(dist, bounds[:, 1:])
    gap = hi - lo
    _check_nearest(gap.value, epoch=epoch)
    return ops.scale(ops.divide(e - lo, gap), float(cfg.k))


def learn_graph_var(xhat: Var, cfg: GraphLearnerConfig, epoch: int = None) -> Var:
    """The similarity matrix learned from the selected data on the tape, through the soft selectors.

    Parameters
    ----------
    xhat : Var
        The n x m selected data.

    cfg : GraphLearnerConfig
        The configuration of the learner.

    epoch : int
        The epoch reported in the errors.

    Returns
    -------
    s : Var
        The n x n similarity.
    """
    n = xhat.shape[0]
    cfg.validate(n)
    k = cfg.k
    eye = np.eye(n, dtype=bool)
    dist = ops.sq_dists(xhat)
    off = dist.value[~eye].reshape(n, n - 1)
    try:
        _check_spread(off)
    except DegenerateRowError as e:
        raise e.at_epoch(epoch) if epoch is not None else e
    e = ops.set_masked(_rescale_var(dist, cfg, eye, epoch), eye, cfg.diag_mask)
    count = candidate_count(n, cfg)
    if count == n:
        ec = e
    else:
        ec = ops.take_along_rows(e, nearest_candidates(_masked_for_candidates(e.value), count))
    cost = ops.square(ops.reshape(ec, (n, count, 1)) - np.arange(k + 2, dtype=np.float64))
    plan = sinkhorn_var(cost, k, cfg.gamma, cfg.zeta)
    delta = ops.scale(ops.sum(ops.gather_columns(plan, list(range(k))), axis=-1), float(count))
    xi = ops.scale(ops.reshape(ops.gather_columns(plan, [k]), (n, count)), float(count))
    e_xi = ops.row_sum(ec * xi)
    e_delta = ops.row_sum(ec * delta)
    den = ops.scale(e_xi, float(k)) - e_delta
    _check_denominator(den.value[:, 0], epoch=epoch)
    return ops.relu(ops.divide(e_xi - e, den))


def alpha_max(e_row: ndarray, k: int, exclude: tp.Sequence[int] = ()) -> float:
    """The largest regularization weight for which the row problem keeps exactly k neighbors.

    It is (k * e_(k+1) - sum of e_(1), ..., e_(k)) / 2 with e_(p) the p-th smallest entry, the excluded
    entries left out.
    """
    e_row = np.asarray(e_row, dtype=np.float64)
    keep = np.setdiff1d(np.arange(e_row.size), np.asarray(exclude, dtype=int))
    if not 1 <= k < keep.size:
        raise ConfigError("k", "must be in [1, {}), got {}.".format(keep.size, k))
    sorted_e = np.sort(e_row[keep])
    return float((k * sorted_e[k] - sorted_e[:k].sum()) / 2.)


def _simplex_projection(v: ndarray) -> ndarray:
    """The Euclidean projection on the probability simplex by the sorted threshold."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.
    ind = np.arange(1, v.size + 1)
    rho = np.flatnonzero(u - css / ind > 0)[-1]
    tau = css[rho] / (rho + 1.)
    return np.maximum(v - tau, 0.)


def _exhaustive_projection(v: ndarray) -> ndarray:
    """The Euclidean projection on the probability simplex by trying every active set."""
    n = v.size
    tol = 1e-12 * max(1., float(np.max(np.abs(v))))
    for size in range(1, n + 1):
        for active in itertools.combinations(range(n), size):
            active = list(active)
            eta = (1. - v[active].sum()) / size
            s = np.zeros(n)
            s[active] = v[active] + eta
            if np.any(s[active] < -tol):
                continue
            inactive = np.setdiff1d(np.arange(n), active)
            if np.all(v[inactive] + eta <= tol):
                return np.maximum(s, 0.)
    raise ArithmeticError("No active set satisfies the optimality conditions.")


def simplex_row_solution(e_row: ndarray, alpha: float, exclude: tp.Sequence[int] = ()) -> ndarray:
    """Solve min sum_j e_j s_j + alpha * s_j ** 2 over the probability simplex, the excluded entries set to 0.

    The solution is the projection of -e / (2 alpha) on the simplex. Rows up to twelve free entries are
    solved by enumerating the active sets, longer rows by the sorted threshold.

    Parameters
    ----------
    e_row : ndarray
        The distance row.

    alpha : float
        The positive weight of the quadratic term.

    exclude : sequence of int
        The entries forced to zero, like the sample itself.

    Returns
    -------
    s_row : ndarray
        The optimal weights.
    """
    if not alpha > 0.:
        raise ConfigError("alpha", "must be positive, got {}.".format(alpha))
    e_row = np.asarray(e_row, dtype=np.float64)
    keep = np.setdiff1d(np.arange(e_row.size), np.asarray(exclude, dtype=int))
    v = -e_row[keep] / (2. * alpha)
    s = np.zeros_like(e_row)
    s[keep] = _exhaustive_projection(v) if keep.size <= MAX_EXHAUSTIVE else _simplex_projection(v)
    return s
