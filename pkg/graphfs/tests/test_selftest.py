import numpy as np
import pytest

import graphfs.selftest as selftest
from graphfs.autodiff import ops


def leaky_relu(a):
    """A relu whose gradient ignores the sign of the input."""
    tape, (a,) = ops._lift(a)

    def vjp(g):
        return (g,)

    return tape.record("relu", np.maximum(a.value, 0.), (a,), vjp)


def test_check_gradients():
    results = selftest.check_gradients(points=2, seed=0)
    names = [r.name for r in results]
    assert "gradcheck relu" in names
    assert names[-3:] == ["gradcheck sinkhorn", "gradcheck laplacian", "gradcheck end_to_end"]
    assert all(r.passed for r in results), [r for r in results if not r.passed]


def test_check_gradients_wrong_relu():
    registry = dict(ops.OPS, relu=leaky_relu)
    results = selftest.check_gradients(points=2, seed=0, registry=registry)
    failed = [r.name for r in results if not r.passed]
    assert failed == ["gradcheck relu"]


@pytest.mark.parametrize("seed", [0, 1])
def test_check_ot_vs_sort(seed):
    # the default gamma, zeta and shape ranges
    results = selftest.check_ot_vs_sort(rows=20, seed=seed)
    assert [r.name for r in results] == ["ot selectors", "ot graph weights"]
    assert all(r.passed for r in results)
    assert results[0].instances == 20


@pytest.mark.parametrize("checker", [selftest.check_orthogonality, selftest.check_kkt])
def test_identity_checks(checker):
    results = checker(8, seed=1)
    assert all(r.passed for r in results)
    assert all(r.max_error >= 0. for r in results)


def test_check_marginals_defaults():
    results = selftest.check_marginals(costs=9, seed=0)
    assert [r.name for r in results] == ["marginals gamma=0.001", "marginals gamma=0.01", "marginals gamma=0.1"]
    assert all(r.passed for r in results), results


def test_check_marginals():
    results = selftest.check_marginals(costs=6, seed=0, gammas=(0.1, 1.))
    assert [r.name for r in results] == ["marginals gamma=0.1", "marginals gamma=1"]
    assert [r.instances for r in results] == [3, 3]
    assert all(r.passed for r in results)


def test_selftest_report():
    report = selftest.SelftestReport([
        selftest.CheckResult("a", 0., 1., 1),
        selftest.CheckResult("b", np.nan, 1., 1),
        selftest.CheckResult("c", 2., 1., 3)
    ])
    assert not report.passed
    assert report.failures() == ["b", "c"]
    assert report["c"].instances == 3
    assert report.to_frame().shape == (3, 5)
    assert report.to_dict()["checks"][0]["passed"]
    with pytest.raises(KeyError):
        report["d"]
