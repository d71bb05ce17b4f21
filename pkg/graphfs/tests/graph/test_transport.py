import numpy as np
import pytest

import graphfs.graph.transport as transport
from graphfs.autodiff import Tape, ops, gradcheck
from graphfs.errors import ConfigError, NumericError, ShapeError
from graphfs.graph.config import TransportPlan, marginals


def test_marginals():
    mu, nu = marginals(5, 2)
    assert np.allclose(mu, 0.2)
    assert np.allclose(nu, [0.2, 0.2, 0.2, 0.4])
    assert mu.sum() == pytest.approx(nu.sum())
    with pytest.raises(ConfigError):
        marginals(3, 2)


@pytest.mark.parametrize(
    "e,j,expected",
    [
        (0., 0, 0.),
        (3., 1, 4.),
        (0., 2, 4.),
        (3., 0, 9.)
    ]
)
def test_build_cost(e, j, expected):
    cost = transport.build_cost(np.array([e, 0., 0.]), k=1)
    assert cost.shape == (3, 3)
    assert cost[0, j] == expected


def test_sinkhorn_hard_limit():
    plan = transport.sinkhorn_bregman(transport.build_cost([0., 0.5, 1.], 1), k=1, gamma=0.01, zeta=5000)
    assert np.allclose(3. * plan.gamma_matrix, np.eye(3), atol=1e-3)


def test_sinkhorn_entropy_limit():
    cost = transport.build_cost([0.1, 0.7, 0.3, 0.9, 0.5], 2)
    plan = transport.sinkhorn_bregman(cost, k=2, gamma=1e3, zeta=50)
    mu, nu = marginals(5, 2)
    assert np.allclose(plan.gamma_matrix, np.outer(mu, nu), atol=1e-3)


def test_sinkhorn_marginals():
    rng = np.random.default_rng(0)
    e = rng.random((4, 8))
    plan = transport.sinkhorn_bregman(transport.build_cost(e, 2), k=2, gamma=0.1, zeta=1000)
    assert plan.gamma_matrix.shape == (4, 8, 4)
    assert np.all(plan.gamma_matrix >= 0.)
    assert plan.marginal_violation() < 1e-6
    for i in range(4):
        single = transport.sinkhorn_bregman(transport.build_cost(e[i], 2), k=2, gamma=0.1, zeta=1000)
        assert np.allclose(single.gamma_matrix, plan.gamma_matrix[i])


def test_sinkhorn_log_domain():
    e = np.array([1e6, 0.2, 0.5, 0.9, 1.])
    plan = transport.sinkhorn_bregman(transport.build_cost(e, 2), k=2, gamma=1e-3, zeta=5000)
    assert plan.mode == "log"
    assert np.all(np.isfinite(plan.gamma_matrix))
    sel = transport.extract_selectors(plan, 2)
    assert np.allclose(sel.delta, [0., 1., 1., 0., 0.], atol=1e-2)
    assert np.allclose(sel.xi, [0., 0., 0., 1., 0.], atol=1e-2)


def test_sinkhorn_error():
    cost = transport.build_cost([0., 0.5, 1.], 1)
    with pytest.raises(ShapeError):
        transport.sinkhorn_bregman(cost, k=2, gamma=0.1)
    with pytest.raises(ConfigError):
        transport.sinkhorn_bregman(cost, k=1, gamma=0.)
    with pytest.raises(ConfigError):
        transport.sinkhorn_bregman(cost, k=1, gamma=0.1, zeta=0)
    with pytest.raises(NumericError):
        transport.sinkhorn_bregman(np.full((3, 3), np.inf), k=1, gamma=0.1)


def test_extract_selectors():
    # the plan of the exact sorting of [3, 1, 2]
    gm = np.array([[0., 0., 1.], [1., 0., 0.], [0., 1., 0.]]) / 3.
    sel = transport.extract_selectors(TransportPlan(gm), k=1)
    assert np.allclose(sel.delta, [0., 1., 0.])
    assert np.allclose(sel.xi, [0., 0., 1.])
    with pytest.raises(ShapeError):
        transport.extract_selectors(TransportPlan(gm), k=2)


def test_extract_selectors_from_sinkhorn():
    plan = transport.sinkhorn_bregman(transport.build_cost([3., 1., 2.], 1), k=1, gamma=0.05, zeta=5000)
    sel = transport.extract_selectors(plan, 1)
    assert np.allclose(sel.delta, [0., 1., 0.], atol=1e-3)
    assert np.allclose(sel.xi, [0., 0., 1.], atol=1e-3)


def test_exact_knn_row():
    sel = transport.exact_knn_row([3., 1., 2.], 2)
    assert sel.hard
    assert sel.delta.tolist() == [0., 1., 1.]
    assert sel.xi.tolist() == [1., 0., 0.]
    tie = transport.exact_knn_row([1., 1., 1., 0.], 2)
    assert tie.delta.tolist() == [1., 0., 0., 1.]
    assert tie.xi.tolist() == [0., 1., 0., 0.]
    with pytest.raises(ConfigError):
        transport.exact_knn_row([1., 2.], 2)
    with pytest.raises(ShapeError):
        transport.exact_knn_row(np.ones((2, 3)), 1)


def test_sinkhorn_var_matches():
    cost = transport.build_cost(np.random.default_rng(1).random((3, 6)), 2)
    tape = Tape()
    out = transport.sinkhorn_var(tape.leaf(cost), 2, 0.1, 50)
    expected = transport.sinkhorn_bregman(cost, 2, 0.1, 50)
    assert np.array_equal(out.value, expected.gamma_matrix)


@pytest.mark.parametrize("gamma", [0.1, 1.])
def test_sinkhorn_var_gradcheck(gamma):
    rng = np.random.default_rng(2)
    weight = rng.normal(size=(6, 4))

    def func(x):
        plan = transport.sinkhorn_var(ops.square(x), 2, gamma, 50)
        return ops.sum(plan * weight)

    assert gradcheck(func, rng.random((6, 4)) + 0.5) < 1e-4


def test_gamma_schedule():
    gammas = transport.gamma_schedule(1e-3, 200)
    assert gammas.shape == (200,)
    assert gammas[0] == pytest.approx(transport.ANNEAL_START)
    assert np.all(np.diff(gammas) <= 0.)
    assert np.all(gammas[100:] == 1e-3)
    assert np.unique(gammas[:100]).size == transport.ANNEAL_STAGES
    assert np.all(transport.gamma_schedule(1e-3, 200, anneal=False) == 1e-3)
    assert np.all(transport.gamma_schedule(2., 200) == 2.)
    assert np.all(transport.gamma_schedule(0.1, 15) == 0.1)


def test_sinkhorn_anneal_agrees():
    e = np.array([[0., 1.2, 1e6, 2., 3.1, 4.2, 5.], [2.1, 0., 1.1, 1e6, 3.3, 4., 6.]])
    cost = transport.build_cost(e, 2)
    annealed = transport.sinkhorn_bregman(cost, k=2, gamma=0.05, zeta=2000)
    plain = transport.sinkhorn_bregman(cost, k=2, gamma=0.05, zeta=2000, anneal=False)
    assert np.allclose(annealed.gamma_matrix, plain.gamma_matrix, atol=1e-8)


def test_sinkhorn_small_gamma_converges():
    # rows rescaled like the learner does, the k + 1 nearest at 0, 1, ..., k
    rng = np.random.default_rng(3)
    values = np.cumsum(rng.uniform(1.5, 2., size=(5, 40)), axis=1)
    e = (values - values[:, :1]) / (values[:, 3:4] - values[:, :1]) * 3.
    plan = transport.sinkhorn_bregman(transport.build_cost(e, 3), k=3, gamma=1e-3, zeta=200)
    assert plan.marginal_violation() < 1e-6
    sel = transport.extract_selectors(plan, 3)
    hard = transport.exact_selectors(e, 3)
    assert np.max(np.abs(sel.delta - hard.delta)) < 1e-2
    assert np.max(np.abs(sel.xi - hard.xi)) < 1e-2


def test_sinkhorn_modes_agree(monkeypatch):
    cost = transport.build_cost(np.random.default_rng(1).random((3, 6)) * 3., 2)
    scaling = transport.sinkhorn_bregman(cost, 2, 0.1, 100)
    monkeypatch.setattr(transport, "MAX_EXPONENT", -1.)
    log = transport.sinkhorn_bregman(cost, 2, 0.1, 100)
    assert (scaling.mode, log.mode) == ("scaling", "log")
    assert np.allclose(scaling.gamma_matrix, log.gamma_matrix, atol=1e-10)


def test_sinkhorn_var_log_gradcheck(monkeypatch):
    monkeypatch.setattr(transport, "MAX_EXPONENT", -1.)
    rng = np.random.default_rng(2)
    weight = rng.normal(size=(6, 4))

    def func(x):
        plan = transport.sinkhorn_var(ops.square(x), 2, 0.1, 50)
        assert plan.tape is x.tape
        return ops.sum(plan * weight)

    assert gradcheck(func, rng.random((6, 4)) + 0.5) < 1e-4
