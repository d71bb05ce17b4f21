import numpy as np
import pytest

import graphfs.autodiff.ops as ops
from graphfs.autodiff import Tape, gradcheck, analytic_gradient
from graphfs.errors import ShapeError, DomainError

RNG = np.random.default_rng(42)
WEIGHT = RNG.normal(size=(4, 3))


def weighted(out):
    """Reduce a 4 x 3 output to a scalar with fixed random weights."""
    return ops.sum(ops.multiply(out, WEIGHT))


@pytest.mark.parametrize(
    "func",
    [
        lambda x: weighted(ops.add(x, WEIGHT)),
        lambda x: weighted(ops.subtract(WEIGHT, x)),
        lambda x: weighted(ops.multiply(x, x)),
        lambda x: weighted(ops.divide(x, ops.exp(x))),
        lambda x: weighted(ops.scale(x, -2.5)),
        lambda x: weighted(ops.matmul(x, ops.transpose(x)) @ WEIGHT),
        lambda x: weighted(ops.reshape(ops.reshape(x, (3, 4)), (4, 3))),
        lambda x: weighted(ops.exp(x)),
        lambda x: weighted(ops.log(ops.square(x) + 1.)),
        lambda x: weighted(ops.softmax(x, axis=0)),
        lambda x: weighted(ops.row_softmax(x)),
        lambda x: ops.sum(ops.row_sum(x) * WEIGHT[:, :1]),
        lambda x: ops.sum(ops.col_sum(x) * WEIGHT[:1]),
        lambda x: ops.sum_all(ops.square(x)),
        lambda x: ops.sum(ops.row_max(x) * WEIGHT[:, :1]),
        lambda x: ops.sum(ops.gather_columns(x, [2, 0, 2]) * WEIGHT),
        lambda x: weighted(ops.take_along_rows(x, [[2, 0, 2], [1, 1, 0], [0, 1, 2], [2, 2, 2]])),
        lambda x: weighted(ops.set_masked(x, np.eye(4, 3, dtype=bool), 7.)),
        lambda x: ops.sum(ops.sq_dists(x) * (WEIGHT @ WEIGHT.T)),
    ]
)
def test_gradcheck(func):
    point = RNG.normal(size=(4, 3))
    assert gradcheck(func, point) < 1e-5


def test_gradcheck_relu():
    point = RNG.normal(size=(4, 3))
    # keep the entries away from the kink
    point = np.where(np.abs(point) < 0.1, 0.5, point)
    assert gradcheck(lambda x: weighted(ops.relu(x)), point) < 1e-5


def test_gradcheck_cholesky():
    def func(x):
        spd = ops.matmul(x, ops.transpose(x)) + 4. * np.eye(4)
        lower = ops.cholesky(spd)
        return ops.sum(lower * (WEIGHT @ WEIGHT.T))

    assert gradcheck(func, RNG.normal(size=(4, 3))) < 1e-5


def test_gradcheck_solve_lower_right():
    lower = np.tril(RNG.normal(size=(3, 3))) + 3. * np.eye(3)

    def func(x):
        return weighted(ops.solve_lower_right(x, lower))

    assert gradcheck(func, RNG.normal(size=(4, 3))) < 1e-5

    def func_factor(x):
        factor = ops.cholesky(ops.matmul(ops.transpose(x), x) + np.eye(3))
        return weighted(ops.solve_lower_right(WEIGHT, factor))

    assert gradcheck(func_factor, RNG.normal(size=(4, 3))) < 1e-5


def test_gradcheck_quad_trace():
    lap = RNG.normal(size=(4, 4))
    assert gradcheck(lambda x: ops.quad_trace(x, lap), RNG.normal(size=(4, 3))) < 1e-5


def test_quad_trace_gradient():
    lap = RNG.normal(size=(4, 4))
    point = RNG.normal(size=(4, 3))
    grad = analytic_gradient(lambda x: ops.quad_trace(x, lap), point)
    assert np.allclose(grad, (lap + lap.T) @ point)


def test_relu():
    tape = Tape()
    x = tape.leaf([[-1., 2.]])
    tape.backward(ops.sum(ops.relu(x)))
    assert np.array_equal(x.grad, [[0., 1.]])


def test_row_softmax():
    tape = Tape()
    x = tape.leaf(np.zeros((2, 3)))
    out = ops.row_softmax(x)
    assert np.allclose(out.value, 1. / 3.)
    big = ops.row_softmax(tape.leaf([[1000., 0., -1000.]]))
    assert np.all(np.isfinite(big.value))
    assert np.allclose(big.value, [[1., 0., 0.]])


@pytest.mark.parametrize(
    "func,expected",
    [
        (lambda x: ops.sum(x), lambda v: np.ones_like(v)),
        (lambda x: ops.sum(x * x), lambda v: 2. * v),
        (lambda x: ops.sum(ops.exp(x)), lambda v: np.exp(v))
    ]
)
def test_known_gradients(func, expected):
    point = RNG.normal(size=(3, 2))
    assert np.allclose(analytic_gradient(func, point), expected(point))


def test_row_max_first_maximum():
    tape = Tape()
    x = tape.leaf([[1., 3., 3.]])
    out = ops.row_max(x)
    tape.backward(ops.sum(out))
    assert out.value[0, 0] == 3.
    assert np.array_equal(x.grad, [[0., 1., 0.]])


def test_take_along_rows():
    tape = Tape()
    x = tape.leaf([[1., 2., 3.], [4., 5., 6.]])
    out = ops.take_along_rows(x, [[2, 2], [0, 1]])
    tape.backward(ops.sum(out))
    assert np.array_equal(out.value, [[3., 3.], [4., 5.]])
    assert np.array_equal(x.grad, [[0., 0., 2.], [1., 1., 0.]])


def test_set_masked():
    tape = Tape()
    x = tape.leaf(np.ones((2, 2)))
    out = ops.set_masked(x, np.eye(2, dtype=bool), 1e6)
    tape.backward(ops.sum(out))
    assert np.array_equal(out.value, [[1e6, 1.], [1., 1e6]])
    assert np.array_equal(x.grad, [[0., 1.], [1., 0.]])


def test_sq_dists():
    tape = Tape()
    out = ops.sq_dists(tape.leaf([[0., 0.], [3., 4.]]))
    assert np.array_equal(out.value, [[0., 25.], [25., 0.]])


def test_broadcast_gradient():
    tape = Tape()
    x = tape.leaf(np.ones((3, 2)))
    b = tape.leaf(np.ones((1, 2)))
    tape.backward(ops.sum(x * b))
    assert b.grad.shape == (1, 2)
    assert np.array_equal(b.grad, [[3., 3.]])


def test_batched_matmul():
    tape = Tape()
    a = tape.leaf(RNG.normal(size=(5, 2, 3)))
    b = tape.leaf(RNG.normal(size=(5, 3, 4)))
    out = ops.matmul(a, b)
    assert out.shape == (5, 2, 4)
    tape.backward(ops.sum(out))
    assert a.grad.shape == (5, 2, 3)


def test_detach():
    tape = Tape()
    x = tape.leaf(np.ones((2, 2)))
    y = ops.detach(x * 2.)
    assert not y.requires_grad
    assert tape.backward(ops.sum(y * x))[x].tolist() == [[2., 2.], [2., 2.]]


@pytest.mark.parametrize(
    "func,error",
    [
        (lambda x: ops.log(x - 1.), DomainError),
        (lambda x: ops.divide(x, np.zeros((2, 2))), DomainError),
        (lambda x: ops.matmul(x, np.ones((3, 3))), ShapeError),
        (lambda x: ops.add(x, np.ones((3, 3))), ShapeError),
        (lambda x: ops.reshape(x, (3, 1)), ShapeError),
        (lambda x: ops.gather_columns(x, [2]), ShapeError),
        (lambda x: ops.take_along_rows(x, [[0], [2]]), ShapeError),
        (lambda x: ops.take_along_rows(x, [[0]]), ShapeError),
        (lambda x: ops.quad_trace(x, np.eye(3)), ShapeError),
    ]
)
def test_op_errors(func, error):
    tape = Tape()
    with pytest.raises(error):
        func(tape.leaf(np.ones((2, 2))))
