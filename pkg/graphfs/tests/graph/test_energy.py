import numpy as np
import pytest

import graphfs.graph.energy as energy
from graphfs.autodiff import ops, gradcheck
from graphfs.errors import ConfigError, ShapeError
from graphfs.graph.config import GraphLearnerConfig, SimilarityGraph, laplacian
from graphfs.graph.learner import assemble_graph


def random_graph(n=6, seed=0):
    s = np.random.default_rng(seed).random((n, n))
    np.fill_diagonal(s, 0.)
    return s


def test_laplacian():
    s = random_graph()
    lap = laplacian(s)
    assert np.allclose(lap, lap.T)
    assert np.allclose(lap.sum(axis=1), 0.)
    assert np.all(np.linalg.eigvalsh(lap) > -1e-12)


def test_dirichlet_energy():
    s = random_graph()
    lap = laplacian(s)
    assert energy.dirichlet_energy(lap, np.ones(6)) == pytest.approx(0., abs=1e-12)
    v = np.random.default_rng(1).normal(size=(6, 3))
    assert energy.dirichlet_energy(lap, v) == pytest.approx(energy.pairwise_energy(s, v))
    assert energy.dirichlet_energy(lap, v) >= 0.
    with pytest.raises(ShapeError):
        energy.dirichlet_energy(lap, np.ones(5))


def test_laplacian_var_gradcheck():
    v = np.random.default_rng(2).normal(size=(6, 2))

    def func(x):
        return ops.quad_trace(v, energy.laplacian_var(ops.exp(x)))

    assert gradcheck(func, random_graph(seed=3)) < 1e-6


def test_heat_kernel_graph():
    X = np.array([[0., 0.], [0., 0.], [1., 0.], [3., 0.]])
    graph = energy.heat_kernel_graph(X, sigma=1., k=1)
    assert graph.S[0, 1] == 1.
    assert graph.S[1, 0] == 1.
    assert graph.S[3, 2] == pytest.approx(np.exp(-2.))
    assert np.all(np.count_nonzero(graph.S, axis=1) == 1)
    wide = energy.heat_kernel_graph(X, sigma=1e8, k=2)
    assert np.allclose(wide.S[wide.S > 0.], 1.)
    with pytest.raises(ConfigError):
        energy.heat_kernel_graph(X, sigma=0., k=1)
    with pytest.raises(ConfigError):
        energy.heat_kernel_graph(X, sigma=1., k=4)


def test_graph_quality():
    s = np.array([[0., 1., 1.], [1., 0., 0.], [0., 1., 0.]])
    assert energy.graph_quality(SimilarityGraph(s), np.array([0, 0, 1])) == pytest.approx(0.5)
    assert energy.graph_quality(SimilarityGraph(np.zeros((3, 3))), np.array([0, 0, 1])) == 0.
    with pytest.raises(ShapeError):
        energy.graph_quality(SimilarityGraph(s), np.array([0, 1]))


def test_random_knn_graph():
    graph = energy.random_knn_graph(8, 3, seed=0)
    assert np.all(np.count_nonzero(graph.S, axis=1) == 3)
    assert np.all(np.diag(graph.S) == 0.)
    assert graph.row_sum_violation() < 1e-12


def test_two_bubble_graph():
    example = energy.two_bubble_graph(seed=0)
    assert example.points.shape == (20, 2)
    energies = example.energies()
    assert energies["matched"] < energies["random_signal"]
    assert energies["matched"] < energies["random_graph"]


def test_two_bubble_energy_ordering():
    ordered = 0
    for seed in range(10):
        energies = energy.two_bubble_graph(seed=seed).energies()
        ordered += int(energies["matched"] < min(energies["random_signal"], energies["random_graph"]))
    assert ordered >= 9


def test_dirichlet_energy_permutation():
    s = random_graph(n=8, seed=4)
    v = np.random.default_rng(5).normal(size=(8, 2))
    perm = np.random.default_rng(6).permutation(8)
    permuted = laplacian(s[np.ix_(perm, perm)])
    assert energy.dirichlet_energy(permuted, v[perm]) == pytest.approx(energy.dirichlet_energy(laplacian(s), v))


def test_heat_graph_joins_more_classes(db):
    blobs = db['blobs']
    heat = energy.heat_kernel_graph(blobs.X, sigma=1., k=5)
    learned = assemble_graph(blobs.X[:, [0, 1]], GraphLearnerConfig(k=5), mode="hard")
    assert energy.graph_quality(heat, blobs.labels) > energy.graph_quality(learned, blobs.labels)
