import numpy as np
import pytest

from graphfs.autodiff import Tape, gradcheck
from graphfs.datasets import gen_synthetic, standardize
from graphfs.errors import ConfigError
from graphfs.evaluation import evaluate_selection
from graphfs.selection import UfsParams
from graphfs.training import TrainConfig, train, loss_forward, grid_search, final_selection, selected_graph


def test_train(db, small_report):
    cfg = db['small_config']
    assert small_report.losses.shape == (cfg.epochs,)
    assert np.all(np.isfinite(small_report.losses))
    assert np.all(small_report.losses >= 0.)
    assert small_report.selection.F.shape == (db['blobs'].d, cfg.m)
    assert len(small_report.selection.hard_indices) == cfg.m
    assert small_report.graph.n == db['blobs'].n
    assert small_report.config == cfg.to_dict()
    assert small_report.wall_time > 0.


def test_train_deterministic(db, small_report):
    again = train(db['blobs'], db['small_config'])
    assert again.to_dict() == small_report.to_dict()


def test_train_zero_lr(db):
    cfg = db['small_config'].replace(lr=0., epochs=3)
    report = train(db['blobs'], cfg)
    init = UfsParams.init(db['blobs'].d, cfg.m, seed=cfg.seed)
    assert np.array_equal(report.theta, init.theta)


@pytest.mark.parametrize("ablation", ["no_ufs", "fixed_heat_graph"])
def test_train_ablation(db, ablation):
    cfg = db['small_config'].replace(ablation=ablation, epochs=5)
    report = train(db['blobs'], cfg)
    assert np.all(np.isfinite(report.losses))
    assert report.config["ablation"] == ablation


def test_train_tune_sigma(db):
    cfg = db['small_config'].replace(ablation="fixed_heat_graph", heat_sigma="tune", epochs=3)
    report = train(db['blobs'], cfg, verbose=1)
    assert report.config["heat_sigma"] in (1., 2., 3., 4., 5.)


@pytest.mark.parametrize(
    "kwargs,field",
    [
        ({"epochs": 0}, "epochs"),
        ({"m": 21}, "m"),
        ({"k": 59}, "k"),
        ({"ablation": "no_dgl"}, "ablation"),
        ({"lr": -1.}, "lr")
    ]
)
def test_train_error(db, kwargs, field):
    with pytest.raises(ConfigError) as info:
        cfg = db['small_config'].replace(**kwargs)
        train(db['blobs'], cfg)
    assert info.value.field == field


def test_config_dict():
    cfg = TrainConfig(m=3, heat_sigma="tune")
    assert TrainConfig.from_dict(cfg.to_dict()).to_dict() == cfg.to_dict()
    with pytest.raises(ConfigError):
        TrainConfig.from_dict({"epoch": 10})


def small_problem():
    d = standardize(gen_synthetic("blobs", n=20, seed=1)).select_features([0, 1, 2, 3])
    d = d.subset(np.arange(10))
    cfg = TrainConfig(m=2, k=2, gamma=0.1, zeta=50, epochs=10)
    params = UfsParams.init(d.d, cfg.m, seed=0, epochs_total=cfg.epochs)
    return d.X, cfg, params


@pytest.mark.parametrize("detach_graph", [False, True])
def test_loss_gradcheck(detach_graph):
    X, cfg, params = small_problem()
    cfg = cfg.replace(detach_graph=detach_graph)

    def func(theta):
        return loss_forward(X, theta, params, cfg, epoch=3)

    point = np.random.default_rng(0).normal(0., 0.5, size=params.theta.shape)
    assert gradcheck(func, point) < 1e-4


def test_loss_gradient_through_graph():
    X, cfg, params = small_problem()
    grads = []
    for detach_graph in (False, True):
        tape = Tape()
        theta = tape.leaf(params.theta)
        tape.backward(loss_forward(X, theta, params, cfg.replace(detach_graph=detach_graph), epoch=0))
        grads.append(theta.grad)
    assert not np.allclose(grads[0], grads[1])


def test_final_selection(db):
    theta = np.zeros((20, 2))
    theta[4, 0] = theta[9, 1] = 5.
    params = UfsParams(theta, epochs_total=10)
    result = final_selection(params, TrainConfig(m=2, epochs=10))
    assert result.hard_indices == (4, 9)
    graph = selected_graph(db['blobs'].X, result.hard_indices, TrainConfig(m=2, k=3))
    assert np.all(np.count_nonzero(graph.S, axis=1) == 3)


def test_grid_search(db):
    base = db['small_config'].replace(epochs=5)
    best, table = grid_search(db['blobs'], base, lrs=(0.1,), gammas=(0.1,), ks=(2, 3))
    assert len(table) == 2
    assert best.k in (2, 3)
    assert table["score"].max() == -table["final_loss"].min()
    best, table = grid_search(db['blobs'], base, lrs=(0.1, 1.), gammas=(0.1,), ks=(3,), select_by="classification")
    assert np.all((table["score"] >= 0.) & (table["score"] <= 1.))
    with pytest.raises(ConfigError):
        grid_search(db['blobs'], base, select_by="energy")


TOY_CONFIG = TrainConfig(m=2, k=5, gamma=0.1, zeta=200, lr=1e-2, epochs=1000)
SEEDS = range(10)


def toy_run(kind: str, seed: int, **kwargs):
    dataset = standardize(gen_synthetic(kind, n=600, seed=seed))
    return dataset, train(dataset, TOY_CONFIG.replace(seed=seed, **kwargs))


@pytest.mark.slow
@pytest.mark.parametrize("kind", ["blobs", "moons", "circles"])
def test_train_selects_informative(kind):
    recovered = 0
    for seed in SEEDS:
        _, report = toy_run(kind, seed)
        assert report.wall_time <= 300.
        sel = report.selection
        recovered += int(set(sel.hard_indices) == {0, 1} and not sel.duplicates)
    assert recovered >= 8


@pytest.mark.slow
@pytest.mark.parametrize("kind", ["blobs", "moons", "circles"])
def test_train_no_ufs_duplicates(kind):
    duplicates = [toy_run(kind, seed, ablation="no_ufs")[1].selection.duplicates for seed in SEEDS]
    assert sum(duplicates) >= 7


@pytest.mark.slow
def test_train_fixed_graph_trails_learned_graph():
    gaps = []
    for seed in SEEDS:
        accuracy = []
        for ablation in ("none", "fixed_heat_graph"):
            dataset, report = toy_run("blobs", seed, ablation=ablation, heat_sigma=1.)
            eval_report, _ = evaluate_selection(
                dataset, report.selection.hard_indices, seeds=[seed], clustering=False, reconstruction=False,
                graph=False
            )
            accuracy.append(eval_report.classification_acc)
        gaps.append(accuracy[0] - accuracy[1])
    assert np.mean(gaps) >= 0.05
