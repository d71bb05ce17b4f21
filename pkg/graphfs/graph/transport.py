"""The differentiable top-k selection by the entropic optimal transport from a distance row to the supports
0, 1, ..., k + 1 and its exact sorting counterpart.

The transport problems of all the rows are solved together: a cost of shape (..., n, k + 2) is a stack of
independent problems.
"""
import typing as tp

import numpy as np
from numpy import ndarray
from scipy.special import logsumexp

from graphfs.autodiff.tape import Var
from graphfs.errors import ConfigError, NumericError, ShapeError
from graphfs.graph.config import TransportPlan, SelectorPair, marginals

__all__ = [
    "build_cost",
    "gamma_schedule",
    "sinkhorn_bregman",
    "sinkhorn_var",
    "extract_selectors",
    "exact_knn_row",
    "exact_selectors",
    "ANNEAL_START",
    "ANNEAL_STAGES"
]

# the kernel iterations are used when every target keeps an entry of the kernel above exp(-MAX_EXPONENT)
MAX_EXPONENT = 230.
ANNEAL_START = 1.
ANNEAL_STAGES = 10


def build_cost(e_row: ndarray, k: int) -> ndarray:
    """The squared distance between each entry of the row and the supports 0, 1, ..., k + 1.

    Parameters
    ----------
    e_row : ndarray
        The distance row of length n or a stack of rows.

    k : int
        The number of neighbors.

    Returns
    -------
    cost : ndarray
        The (..., n, k + 2) cost with cost[..., i, j] = (e[..., i] - j) ** 2.
    """
    e_row = np.asarray(e_row, dtype=np.float64)
    return (e_row[..., None] - np.arange(k + 2, dtype=np.float64)) ** 2


def gamma_schedule(gamma: float, zeta: int, anneal: bool = True) -> ndarray:
    """The weight of the entropy at each of the zeta iterations.

    When annealed, the first half of the iterations is split into ANNEAL_STAGES stages whose weights decrease
    geometrically from ANNEAL_START to gamma. The second half runs at gamma. A gamma at or above ANNEAL_START
    and fewer than 2 * ANNEAL_STAGES iterations are not annealed.
    """
    gammas = np.full(zeta, float(gamma))
    length = (zeta // 2) // ANNEAL_STAGES
    if not anneal or gamma >= ANNEAL_START or length == 0:
        return gammas
    ratio = ANNEAL_START / gamma
    for s in range(ANNEAL_STAGES):
        gammas[s * length:(s + 1) * length] = gamma * ratio ** ((ANNEAL_STAGES - s) / ANNEAL_STAGES)
    return gammas


def _stages(gammas: ndarray) -> tp.List[tp.Tuple[int, int, float]]:
    """The (start, stop, gamma) of the runs of equal weights."""
    bounds = [0] + (np.flatnonzero(np.diff(gammas)) + 1).tolist() + [gammas.size]
    return [(start, stop, float(gammas[start])) for start, stop in zip(bounds[:-1], bounds[1:])]


def _check_cost(cost: ndarray, k: int, gamma: float, zeta: int) -> tp.Tuple[int, ndarray, ndarray]:
    if cost.ndim < 2 or cost.shape[-1] != k + 2:
        raise ShapeError("Expect a cost with {} columns, got shape {}.".format(k + 2, cost.shape))
    if not gamma > 0.:
        raise ConfigError("gamma", "must be positive, got {}.".format(gamma))
    if zeta < 1:
        raise ConfigError("zeta", "must be at least 1, got {}.".format(zeta))
    if not np.all(np.isfinite(cost)):
        raise NumericError("The transport cost has non-finite entries.")
    n = cost.shape[-2]
    mu, nu = marginals(n, k)
    return n, mu, nu


class _Iterates:
    """The forward iterations and what the reverse pass needs to replay them.

    history holds the column scaling (or its log) after each iteration, the initial one first. At the first
    iteration of a stage the previous column potential is carried over in the units of the cost, which raises
    the scaling to the power of the ratio of the two weights.
    """

    def __init__(self, mode: str, plan: ndarray, history: tp.List[ndarray], shifted: ndarray, gammas: ndarray):
        self.mode = mode
        self.plan = plan
        self.history = history
        self.shifted = shifted
        self.gammas = gammas

    def carry(self, t: int) -> float:
        """The exponent applied to the column scaling entering iteration t."""
        if t == 0 or self.gammas[t] == self.gammas[t - 1]:
            return 1.
        return float(self.gammas[t - 1] / self.gammas[t])

    def column_input(self, t: int) -> ndarray:
        c = self.carry(t)
        if c == 1.:
            return self.history[t]
        return self.history[t] ** c if self.mode == "scaling" else self.history[t] * c


def _row_scaling(kernel: ndarray, u: ndarray, mu: ndarray) -> ndarray:
    return mu / np.einsum("...ij,...j->...i", kernel, u)


def _column_scaling(kernel: ndarray, v: ndarray, nu: ndarray) -> ndarray:
    return nu / np.einsum("...ij,...i->...j", kernel, v)


def _scaling_iterations(shifted: ndarray, mu: ndarray, nu: ndarray, gammas: ndarray) -> _Iterates:
    its = _Iterates("scaling", None, [np.full(shifted.shape[:-2] + shifted.shape[-1:], 1. / shifted.shape[-1])],
                    shifted, gammas)
    for start, stop, gamma in _stages(gammas):
        kernel = np.exp(-shifted / gamma)
        for t in range(start, stop):
            v = _row_scaling(kernel, its.column_input(t), mu)
            its.history.append(_column_scaling(kernel, v, nu))
    its.plan = v[..., :, None] * kernel * its.history[-1][..., None, :]
    return its


def _log_iterations(shifted: ndarray, mu: ndarray, nu: ndarray, gammas: ndarray) -> _Iterates:
    log_mu, log_nu = np.log(mu), np.log(nu)
    its = _Iterates("log", None, [np.full(shifted.shape[:-2] + shifted.shape[-1:], -np.log(shifted.shape[-1]))],
                    shifted, gammas)
    for start, stop, gamma in _stages(gammas):
        a = -shifted / gamma
        for t in range(start, stop):
            f = log_mu - logsumexp(a + its.column_input(t)[..., None, :], axis=-1)
            its.history.append(log_nu - logsumexp(a + f[..., :, None], axis=-2))
    its.plan = np.exp(a + f[..., :, None] + its.history[-1][..., None, :])
    return its


def _iterate(cost: ndarray, mu: ndarray, nu: ndarray, gamma: float, zeta: int, anneal: bool) -> _Iterates:
    # a per row shift leaves the plan unchanged
    shifted = cost - cost.min(axis=-1, keepdims=True)
    gammas = gamma_schedule(gamma, zeta, anneal=anneal)
    reachable = np.max(np.min(shifted, axis=-2)) / gamma
    if reachable <= MAX_EXPONENT:
        its = _scaling_iterations(shifted, mu, nu, gammas)
        if np.all(np.isfinite(its.plan)):
            return its
    its = _log_iterations(shifted, mu, nu, gammas)
    if not np.all(np.isfinite(its.plan)):
        raise NumericError(
            "The transport plan is not finite at gamma = {}. Use a larger gamma or rescale the distance "
            "rows.".format(gamma)
        )
    return its


def _scaling_vjp(its: _Iterates, mu: ndarray, nu: ndarray, grad: ndarray) -> ndarray:
    """Back-propagate through the kernel iterations. Only the column scalings are stored, the row scalings are
    computed again."""
    z = grad * its.plan
    gammas, history = its.gammas, its.history
    grad_cost = -z / gammas[-1]
    grad_v_plan = z.sum(axis=-1)
    grad_u = z.sum(axis=-2) / history[-1]
    for start, stop, gamma in reversed(_stages(gammas)):
        kernel = np.exp(-its.shifted / gamma)
        grad_kernel = np.zeros_like(kernel)
        for t in range(stop - 1, start - 1, -1):
            u_in, u_out = its.column_input(t), history[t + 1]
            v = _row_scaling(kernel, u_in, mu)
            grad_x = -grad_u * u_out * u_out / nu
            grad_v = np.einsum("...ij,...j->...i", kernel, grad_x)
            if t == gammas.size - 1:
                grad_v = grad_v + grad_v_plan / v
            grad_y = -grad_v * v * v / mu
            grad_kernel += v[..., :, None] * grad_x[..., None, :] + grad_y[..., :, None] * u_in[..., None, :]
            grad_u = np.einsum("...ij,...i->...j", kernel, grad_y)
            c = its.carry(t)
            if c != 1.:
                grad_u = c * grad_u * u_in / history[t]
        grad_cost -= grad_kernel * kernel / gamma
    return grad_cost


def _log_vjp(its: _Iterates, mu: ndarray, nu: ndarray, grad: ndarray) -> ndarray:
    """Back-propagate through the log iterations, the row potentials computed again."""
    log_mu, log_nu = np.log(mu), np.log(nu)
    z = grad * its.plan
    gammas, history = its.gammas, its.history
    grad_cost = -z / gammas[-1]
    grad_f = z.sum(axis=-1)
    grad_g = z.sum(axis=-2)
    for start, stop, gamma in reversed(_stages(gammas)):
        a = -its.shifted / gamma
        for t in range(stop - 1, start - 1, -1):
            g_in, g_out = its.column_input(t), history[t + 1]
            f = log_mu - logsumexp(a + g_in[..., None, :], axis=-1)
            # the column update, then the row update
            w_col = np.exp(a + f[..., :, None] + (g_out - log_nu)[..., None, :]) * grad_g[..., None, :]
            grad_f = grad_f - w_col.sum(axis=-1)
            w_row = np.exp(a + g_in[..., None, :] + (f - log_mu)[..., :, None]) * grad_f[..., :, None]
            grad_cost += (w_col + w_row) / gamma
            grad_g = -w_row.sum(axis=-2) * its.carry(t)
            grad_f = np.zeros_like(grad_f)
    return grad_cost


def sinkhorn_bregman(cost: ndarray, k: int, gamma: float, zeta: int = 200, anneal: bool = True) -> TransportPlan:
    """Solve the entropic transport problem by the iterative Bregman projections.

    The row scaling and the column scaling are alternated zeta times from the column scaling 1 / (k + 2). With
    anneal, the weight of the entropy follows gamma_schedule and reaches gamma at half of the iterations, which
    brings small gammas to the marginals in a few hundred iterations. The kernel exp(-cost / gamma) is used
    directly when it is representable, otherwise the same iterations run on the log potentials.

    Parameters
    ----------
    cost : ndarray
        The (..., n, k + 2) cost from build_cost.

    k : int
        The number of neighbors.

    gamma : float
        The positive weight of the entropy.

    zeta : int
        The number of iterations.

    anneal : bool
        If False, all the iterations use gamma.

    Returns
    -------
    plan : TransportPlan
        The plan. Its column sums match the target marginal and its row sums converge to 1 / n.
    """
    cost = np.asarray(cost, dtype=np.float64)
    _, mu, nu = _check_cost(cost, k, gamma, zeta)
    its = _iterate(cost, mu, nu, gamma, zeta, anneal)
    return TransportPlan(its.plan, mode=its.mode)


def sinkhorn_var(cost: Var, k: int, gamma: float, zeta: int = 200, anneal: bool = True) -> Var:
    """The tape version of sinkhorn_bregman. The reverse pass unrolls all the iterations."""
    _, mu, nu = _check_cost(cost.value, k, gamma, zeta)
    its = _iterate(cost.value, mu, nu, gamma, zeta, anneal)

    def vjp(g):
        if its.mode == "scaling":
            return (_scaling_vjp(its, mu, nu, g),)
        return (_log_vjp(its, mu, nu, g),)

    return cost.tape.record("sinkhorn", its.plan, (cost,), vjp)


def extract_selectors(plan: TransportPlan, k: int) -> SelectorPair:
    """The selectors n times the sum of the first k columns and n times the (k + 1)-th column of the plan."""
    gm = plan.gamma_matrix
    if gm.shape[-1] != k + 2:
        raise ShapeError("Expect a plan with {} columns, got shape {}.".format(k + 2, gm.shape))
    n = gm.shape[-2]
    return SelectorPair(n * gm[..., :k].sum(axis=-1), n * gm[..., k], hard=False)


def exact_selectors(e: ndarray, k: int) -> SelectorPair:
    """The hard selectors of the rows of e by the stable sorting. Ties go to the lowest index."""
    e = np.asarray(e, dtype=np.float64)
    n = e.shape[-1]
    if not 1 <= k < n:
        raise ConfigError("k", "must be in [1, {}), got {}.".format(n, k))
    order = np.argsort(e, axis=-1, kind="stable")
    delta = np.zeros_like(e)
    xi = np.zeros_like(e)
    np.put_along_axis(delta, order[..., :k], 1., axis=-1)
    np.put_along_axis(xi, order[..., k:k + 1], 1., axis=-1)
    return SelectorPair(delta, xi, hard=True)


def exact_knn_row(e_row: ndarray, k: int) -> SelectorPair:
    """The hard selectors of one distance row."""
    e_row = np.asarray(e_row, dtype=np.float64)
    if e_row.ndim != 1:
        raise ShapeError("Expect a row vector, got shape {}.".format(e_row.shape))
    return exact_selectors(e_row, k)
