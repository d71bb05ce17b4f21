"""The self checks of the numerical core: the gradients of the operations, the neighbor selection against the
sorting, the de-duplication identities, the closed-form graph weights and the transport marginals."""
import typing as tp

import numpy as np
import pandas as pd
from numpy import ndarray

from graphfs import linalg
from graphfs.autodiff import ops
from graphfs.autodiff.checking import gradcheck
from graphfs.autodiff.tape import Var
from graphfs.datasets import make_rng
from graphfs.graph.config import laplacian
from graphfs.graph.energy import laplacian_var
from graphfs.graph.learner import graph_row_weights, alpha_max, simplex_row_solution
from graphfs.graph.transport import build_cost, sinkhorn_bregman, sinkhorn_var, extract_selectors, exact_selectors
from graphfs.selection import UfsParams, orthogonalize_exact, orthogonalize_practical
from graphfs.training.config import TrainConfig
from graphfs.training.running import loss_forward

__all__ = [
    "CheckResult",
    "SelftestReport",
    "check_gradients",
    "check_ot_vs_sort",
    "check_orthogonality",
    "check_kkt",
    "check_marginals",
    "run_selftest"
]

OP_TOL = 1e-5
END_TO_END_TOL = 1e-4
OT_TOL = 1e-2
ORTHO_TOL = 1e-8
KKT_TOL = 1e-8
MARGINAL_TOL = 1e-6


class CheckResult:
    """The outcome of one check.

    Attributes
    ----------
    name : str
        The name of the check.

    max_error : float
        The largest error observed over the instances.

    tolerance : float
        The error above which the check fails.

    instances : int
        The number of instances checked.
    """

    def __init__(self, name: str, max_error: float, tolerance: float, instances: int):
        self.name = name
        self.max_error = float(max_error)
        self.tolerance = float(tolerance)
        self.instances = int(instances)

    def __repr__(self):
        return "CheckResult({}, max_error={:.3e}, passed={})".format(self.name, self.max_error, self.passed)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.max_error) and self.max_error < self.tolerance)

    def to_dict(self) -> dict:
        return {
            "name": self.name, "max_error": self.max_error, "tolerance": self.tolerance,
            "instances": self.instances, "passed": self.passed
        }


class SelftestReport:
    """All the check results."""

    def __init__(self, checks: tp.List[CheckResult]):
        self.checks = checks

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> tp.List[str]:
        return [c.name for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> CheckResult:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([c.to_dict() for c in self.checks])


def _weighted(out: Var, weights: ndarray) -> Var:
    return ops.sum_all(ops.multiply(out, weights))


def _op_cases(rng: np.random.Generator, registry: tp.Dict[str, tp.Callable]) -> tp.Dict[str, tp.Tuple]:
    """The function and the point generator of the check of each registered operation."""

    def normal(*shape):
        return lambda: rng.normal(size=shape)

    def positive(*shape):
        return lambda: rng.uniform(1., 2., size=shape)

    def away_from_zero(*shape):
        return lambda: rng.choice([-1., 1.], size=shape) * rng.uniform(0.1, 1., size=shape)

    c34, c45 = rng.normal(size=(3, 4)), rng.normal(size=(4, 5))
    w34, w35, w43 = rng.normal(size=(3, 4)), rng.normal(size=(3, 5)), rng.normal(size=(4, 3))
    w14, w31, w32 = rng.normal(size=(1, 4)), rng.normal(size=(3, 1)), rng.normal(size=(3, 2))
    w44, w55, w33 = rng.normal(size=(4, 4)), rng.normal(size=(5, 5)), rng.normal(size=(3, 3))
    s = rng.uniform(size=(5, 5))
    lap = laplacian(s)
    eye4 = np.eye(4, dtype=bool)
    strict_upper = np.triu(np.ones((3, 3), dtype=bool), 1)
    lower = np.tril(rng.normal(size=(3, 3)), -1) + np.diag(rng.uniform(1., 2., size=3))

    def op(name):
        return registry[name]

    return {
        "add": (lambda x: _weighted(op("add")(x, c34), w34), normal(3, 4)),
        "subtract": (lambda x: _weighted(op("subtract")(c34, x), w34), normal(3, 4)),
        "multiply": (lambda x: _weighted(op("multiply")(x, c34), w34), normal(3, 4)),
        "divide": (lambda x: _weighted(op("divide")(c34, x), w34), positive(3, 4)),
        "scale": (lambda x: _weighted(op("scale")(x, 1.7), w34), normal(3, 4)),
        "matmul": (lambda x: _weighted(op("matmul")(x, c45), w35), normal(3, 4)),
        "transpose": (lambda x: _weighted(op("transpose")(x), w43), normal(3, 4)),
        "reshape": (lambda x: _weighted(op("reshape")(x, (4, 3)), w43), normal(3, 4)),
        "exp": (lambda x: _weighted(op("exp")(x), w34), normal(3, 4)),
        "log": (lambda x: _weighted(op("log")(x), w34), positive(3, 4)),
        "square": (lambda x: _weighted(op("square")(x), w34), normal(3, 4)),
        "relu": (lambda x: _weighted(op("relu")(x), w34), away_from_zero(3, 4)),
        "softmax": (lambda x: _weighted(op("softmax")(x, axis=0), w34), normal(3, 4)),
        "row_softmax": (lambda x: _weighted(op("row_softmax")(x), w34), normal(3, 4)),
        "sum": (lambda x: _weighted(op("sum")(x, axis=0, keepdims=True), w14), normal(3, 4)),
        "row_sum": (lambda x: _weighted(op("row_sum")(x), w31), normal(3, 4)),
        "col_sum": (lambda x: _weighted(op("col_sum")(x), w14), normal(3, 4)),
        "sum_all": (lambda x: ops.scale(op("sum_all")(ops.square(x)), 0.5), normal(3, 4)),
        "row_max": (lambda x: _weighted(op("row_max")(x), w31), normal(3, 4)),
        "gather_columns": (lambda x: _weighted(op("gather_columns")(x, [0, 2]), w32), normal(3, 4)),
        "take_along_rows": (
            lambda x: _weighted(op("take_along_rows")(x, np.array([[0, 2], [3, 3], [1, 0]])), w32), normal(3, 4)
        ),
        "set_masked": (lambda x: _weighted(op("set_masked")(x, eye4, 0.5), w44), normal(4, 4)),
        "quad_trace": (lambda x: op("quad_trace")(x, lap), normal(5, 2)),
        "sq_dists": (lambda x: _weighted(op("sq_dists")(x), w55), normal(5, 3)),
        "cholesky": (
            lambda x: _weighted(op("cholesky")(ops.scale(x + ops.transpose(x), 0.5) + 4. * np.eye(3)), w33),
            normal(3, 3)
        ),
        "solve_lower_right": (lambda x: _weighted(op("solve_lower_right")(x, lower), w33), normal(3, 3)),
        "solve_lower_right (factor)": (
            lambda x: _weighted(
                op("solve_lower_right")(c34[:, :3], ops.set_masked(x, strict_upper, 0.) + 2. * np.eye(3)), w33
            ),
            lambda: 0.3 * rng.normal(size=(3, 3))
        ),
    }


def _tape_cases(rng: np.random.Generator, seed: int) -> tp.Dict[str, tp.Tuple]:
    """The checks of the operations recorded outside the registry, and of the whole loss."""
    k = 2
    w64, w55 = rng.normal(size=(6, k + 2)), rng.normal(size=(5, 5))
    n, d = 10, 4
    X = rng.normal(size=(n, d))
    X = (X - X.mean(axis=0)) / np.sqrt(np.sum((X - X.mean(axis=0)) ** 2, axis=0))
    cfg = TrainConfig(m=2, k=k, gamma=0.1, zeta=50, epochs=10, seed=seed)
    params = UfsParams.init(d, cfg.m, seed=seed, epochs_total=cfg.epochs)

    def cost_point():
        return build_cost(_tie_free_rows(rng, 1, 6, k)[0], k)

    return {
        "sinkhorn": (lambda x: _weighted(sinkhorn_var(x, k, 0.1, zeta=50), w64), cost_point),
        "laplacian": (lambda x: _weighted(laplacian_var(x), w55), lambda: rng.uniform(size=(5, 5))),
        "end_to_end": (lambda x: loss_forward(X, x, params, cfg, 0), lambda: rng.normal(size=(d, cfg.m)))
    }


def check_gradients(
    points: int = 10, seed: int = 0, registry: tp.Dict[str, tp.Callable] = None
) -> tp.List[CheckResult]:
    """Compare the reverse mode gradient of every operation and of the loss with the central differences.

    Parameters
    ----------
    points : int
        The number of random points of each check.

    seed : int
        The random seed.

    registry : dict
        The operations by name. Default is the registry of the operations. Replacing an operation checks the
        replacement.

    Returns
    -------
    results : list of CheckResult
        One result per operation, then the transport, the Laplacian and the end to end loss.
    """
    registry = ops.OPS if registry is None else registry
    rng = make_rng(seed, "graphfs.selftest.check_gradients")
    cases = _op_cases(rng, registry)
    results = []
    for name, (func, point) in cases.items():
        err = max(gradcheck(func, point()) for _ in range(points))
        results.append(CheckResult("gradcheck {}".format(name), err, OP_TOL, points))
    for name, (func, point) in _tape_cases(rng, seed).items():
        err = max(gradcheck(func, point()) for _ in range(points))
        tol = END_TO_END_TOL if name == "end_to_end" else OP_TOL
        results.append(CheckResult("gradcheck {}".format(name), err, tol, points))
    return results


def _tie_free_rows(rng: np.random.Generator, count: int, n: int, k: int) -> ndarray:
    """Rows of n distinct entries rescaled like the distance rows of the learner: the smallest at 0 and the
    (k + 1)-th smallest at k. Two sorted neighbors are between 0.75 and 4 / 3 apart."""
    values = np.cumsum(rng.uniform(1.5, 2., size=(count, n)), axis=1)
    values = rng.permuted(values, axis=1)
    part = np.partition(values, (0, k), axis=1)
    lo, hi = part[:, :1], part[:, k:k + 1]
    return (values - lo) / (hi - lo) * k


def _shapes(rng: np.random.Generator, count: int, n_range: tp.Tuple[int, int], k_range: tp.Tuple[int, int]):
    """Group the random instance shapes by (n, k)."""
    ns = rng.integers(n_range[0], n_range[1] + 1, size=count)
    ks = rng.integers(k_range[0], k_range[1] + 1, size=count)
    ks = np.minimum(ks, ns - 2)
    groups = {}
    for n, k in zip(ns.tolist(), ks.tolist()):
        groups[(n, k)] = groups.get((n, k), 0) + 1
    return groups


def check_ot_vs_sort(
    rows: int = 1000,
    seed: int = 0,
    gamma: float = 1e-3,
    zeta: int = 200,
    n_range: tp.Tuple[int, int] = (6, 50),
    k_range: tp.Tuple[int, int] = (1, 5)
) -> tp.List[CheckResult]:
    """Compare the selectors of the transport plan and their graph weights with those of the sorting.

    The rows are tie-free and rescaled like the distance rows of the learner, so the gaps between the sorted
    entries are large compared with gamma and the soft selection approaches the hard one.
    """
    rng = make_rng(seed, "graphfs.selftest.check_ot_vs_sort")
    sel_err, weight_err = 0., 0.
    for (n, k), count in _shapes(rng, rows, n_range, k_range).items():
        e = _tie_free_rows(rng, count, n, k)
        soft = extract_selectors(sinkhorn_bregman(build_cost(e, k), k, gamma, zeta), k)
        hard = exact_selectors(e, k)
        sel_err = max(sel_err, np.max(np.abs(soft.delta - hard.delta)), np.max(np.abs(soft.xi - hard.xi)))
        diff = graph_row_weights(e, soft, k) - graph_row_weights(e, hard, k)
        weight_err = max(weight_err, float(np.max(np.abs(diff))))
    return [
        CheckResult("ot selectors", sel_err, OT_TOL, rows),
        CheckResult("ot graph weights", weight_err, OT_TOL, rows)
    ]


def _relaxed(rng: np.random.Generator, duplicate: bool) -> ndarray:
    d = int(rng.integers(3, 11))
    m = int(rng.integers(2 if duplicate else 1, min(d, 4) + 1))
    z = 3. * rng.normal(size=(d, m))
    fhat = np.exp(z - z.max(axis=0))
    fhat /= fhat.sum(axis=0)
    if duplicate:
        fhat[:, 1] = fhat[:, 0]
    return fhat


def check_orthogonality(instances: int = 100, seed: int = 0, eps: float = 1e-4) -> tp.List[CheckResult]:
    """Check F.T @ F = I for the exact de-duplication and F.T @ F = I - eps inv(L) inv(L).T for the practical one,
    every fourth instance with a duplicated column."""
    rng = make_rng(seed, "graphfs.selftest.check_orthogonality")
    exact_err, practical_err = 0., 0.
    for i in range(instances):
        fhat = _relaxed(rng, duplicate=(i % 4 == 0))
        m = fhat.shape[1]
        F = orthogonalize_exact(fhat, eps)
        exact_err = max(exact_err, float(np.max(np.abs(F.T @ F - np.eye(m)))))
        F, factor = orthogonalize_practical(fhat, eps)
        inv = linalg.inverse_lower(factor)
        target = np.eye(m) - eps * inv @ inv.T
        practical_err = max(practical_err, float(np.max(np.abs(F.T @ F - target))))
    return [
        CheckResult("orthogonality exact", exact_err, ORTHO_TOL, instances),
        CheckResult("orthogonality practical", practical_err, ORTHO_TOL, instances)
    ]


def check_kkt(instances: int = 500, seed: int = 0, diag_mask: float = 1e6) -> tp.List[CheckResult]:
    """Compare the closed-form weights of a row with the exact minimizer of the row problem at alpha_max."""
    rng = make_rng(seed, "graphfs.selftest.check_kkt")
    err = 0.
    for _ in range(instances):
        n = int(rng.integers(4, 13))
        k = int(rng.integers(1, min(5, n - 2) + 1))
        i = int(rng.integers(n))
        e = np.cumsum(rng.uniform(0.1, 1., size=n))
        e = rng.permutation(e)
        masked = e.copy()
        masked[i] = diag_mask
        closed = graph_row_weights(masked, exact_selectors(masked, k), k)
        exact = simplex_row_solution(e, alpha_max(e, k, exclude=[i]), exclude=[i])
        err = max(err, float(np.max(np.abs(closed - exact))))
    return [CheckResult("kkt closed form", err, KKT_TOL, instances)]


def check_marginals(
    costs: int = 100,
    seed: int = 0,
    gammas: tp.Sequence[float] = (1e-3, 1e-2, 1e-1),
    zeta: int = 200,
    n_range: tp.Tuple[int, int] = (6, 50),
    k_range: tp.Tuple[int, int] = (1, 5)
) -> tp.List[CheckResult]:
    """The largest deviation of the plans from the marginals, the costs spread over the gammas."""
    rng = make_rng(seed, "graphfs.selftest.check_marginals")
    results = []
    for j, gamma in enumerate(gammas):
        count = costs // len(gammas) + (1 if j < costs % len(gammas) else 0)
        err = 0.
        for (n, k), size in _shapes(rng, count, n_range, k_range).items():
            plan = sinkhorn_bregman(build_cost(_tie_free_rows(rng, size, n, k), k), k, gamma, zeta)
            err = max(err, plan.marginal_violation())
        results.append(CheckResult("marginals gamma={:g}".format(gamma), err, MARGINAL_TOL, count))
    return results


def run_selftest(
    points: int = 10,
    ot_rows: int = 1000,
    ortho_instances: int = 100,
    kkt_instances: int = 500,
    marginal_costs: int = 100,
    seed: int = 0,
    registry: tp.Dict[str, tp.Callable] = None,
    verbose: int = 0
) -> SelftestReport:
    """Run all the checks.

    Parameters
    ----------
    points : int
        The number of random points of each gradient check.

    ot_rows : int
        The number of rows compared with the sorting.

    ortho_instances : int
        The number of relaxed selections de-duplicated.

    kkt_instances : int
        The number of row problems solved exactly.

    marginal_costs : int
        The number of transport problems whose marginals are checked.

    seed : int
        The random seed.

    registry : dict
        The operations to check the gradients of. Default is the registry of the operations.

    verbose : int
        1 prints each result when it is done.

    Returns
    -------
    report : SelftestReport
        The results.
    """
    steps = [
        lambda: check_gradients(points, seed=seed, registry=registry),
        lambda: check_ot_vs_sort(ot_rows, seed=seed),
        lambda: check_orthogonality(ortho_instances, seed=seed),
        lambda: check_kkt(kkt_instances, seed=seed),
        lambda: check_marginals(marginal_costs, seed=seed)
    ]
    checks = []
    for step in steps:
        for result in step():
            if verbose > 0:
                print("{:<40} max error = {:.3e} ({})".format(
                    result.name, result.max_error, "pass" if result.passed else "FAIL"))
            checks.append(result)
    return SelftestReport(checks)
