"""The differentiable operations on dense arrays.

Each operation computes the forward value with numpy and records a vector-Jacobian product on the tape.
Element-wise operations broadcast like numpy, and matrix operations work on the last two axes so that a
stack of small problems can be solved as one batched array.
"""
import typing as tp

import numpy as np
from numpy import ndarray
from scipy.linalg import solve_triangular

from graphfs import linalg
from graphfs.autodiff.tape import Tape, Var
from graphfs.errors import ShapeError, DomainError

__all__ = [
    "add",
    "subtract",
    "multiply",
    "divide",
    "scale",
    "matmul",
    "transpose",
    "reshape",
    "exp",
    "log",
    "square",
    "relu",
    "softmax",
    "row_softmax",
    "sum",
    "row_sum",
    "col_sum",
    "sum_all",
    "row_max",
    "gather_columns",
    "take_along_rows",
    "set_masked",
    "quad_trace",
    "sq_dists",
    "cholesky",
    "solve_lower_right",
    "detach",
    "OPS"
]

Operand = tp.Union[Var, ndarray, float]


def _tape_of(*args: Operand) -> Tape:
    for arg in args:
        if isinstance(arg, Var):
            return arg.tape
    raise TypeError("At least one operand must be a variable.")


def _lift(*args: Operand) -> tp.Tuple[Tape, tp.List[Var]]:
    tape = _tape_of(*args)
    return tape, [tape.lift(arg) for arg in args]


def _unbroadcast(grad: ndarray, shape: tp.Tuple[int, ...]) -> ndarray:
    """Sum the gradient over the axes that were broadcast to reach the output shape."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op: str, *shapes: tp.Tuple[int, ...]) -> tp.Tuple[int, ...]:
    try:
        return np.broadcast_shapes(*shapes)
    except ValueError:
        raise ShapeError("Operation '{}' cannot broadcast shapes {}.".format(op, ", ".join(map(str, shapes))))


def add(a: Operand, b: Operand) -> Var:
    """a + b."""
    tape, (a, b) = _lift(a, b)
    _broadcast_shape("add", a.shape, b.shape)

    def vjp(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return tape.record("add", a.value + b.value, (a, b), vjp)


def subtract(a: Operand, b: Operand) -> Var:
    """a - b."""
    tape, (a, b) = _lift(a, b)
    _broadcast_shape("subtract", a.shape, b.shape)

    def vjp(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return tape.record("subtract", a.value - b.value, (a, b), vjp)


def multiply(a: Operand, b: Operand) -> Var:
    """Element-wise a * b."""
    tape, (a, b) = _lift(a, b)
    _broadcast_shape("multiply", a.shape, b.shape)
    av, bv = a.value, b.value

    def vjp(g):
        return _unbroadcast(g * bv, a.shape), _unbroadcast(g * av, b.shape)

    return tape.record("multiply", av * bv, (a, b), vjp)


def divide(a: Operand, b: Operand) -> Var:
    """Element-wise a / b."""
    tape, (a, b) = _lift(a, b)
    _broadcast_shape("divide", a.shape, b.shape)
    av, bv = a.value, b.value
    if np.any(bv == 0.):
        raise DomainError("Operation 'divide': division by zero.")
    out = av / bv

    def vjp(g):
        gb = -g * out / bv
        return _unbroadcast(g / bv, a.shape), _unbroadcast(gb, b.shape)

    return tape.record("divide", out, (a, b), vjp)


def scale(a: Operand, c: float) -> Var:
    """Multiply by a scalar constant."""
    tape, (a,) = _lift(a)
    c = float(c)

    def vjp(g):
        return (g * c,)

    return tape.record("scale", a.value * c, (a,), vjp)


def matmul(a: Operand, b: Operand) -> Var:
    """The matrix product over the last two axes."""
    tape, (a, b) = _lift(a, b)
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError("Operation 'matmul' needs at least two dimensions, got {} and {}.".format(a.shape, b.shape))
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError("Operation 'matmul' cannot multiply shapes {} and {}.".format(a.shape, b.shape))
    av, bv = a.value, b.value

    def vjp(g):
        ga = g @ np.swapaxes(bv, -1, -2)
        gb = np.swapaxes(av, -1, -2) @ g
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

    return tape.record("matmul", av @ bv, (a, b), vjp)


def transpose(a: Operand) -> Var:
    """Swap the last two axes."""
    tape, (a,) = _lift(a)
    if a.ndim < 2:
        raise ShapeError("Operation 'transpose' needs at least two dimensions, got {}.".format(a.shape))

    def vjp(g):
        return (np.swapaxes(g, -1, -2),)

    return tape.record("transpose", np.swapaxes(a.value, -1, -2).copy(), (a,), vjp)


def reshape(a: Operand, shape: tp.Tuple[int, ...]) -> Var:
    """Reshape without changing the data."""
    tape, (a,) = _lift(a)
    try:
        out = a.value.reshape(shape).copy()
    except ValueError:
        raise ShapeError("Operation 'reshape' cannot reshape {} to {}.".format(a.shape, shape))

    def vjp(g):
        return (g.reshape(a.shape),)

    return tape.record("reshape", out, (a,), vjp)


def exp(a: Operand) -> Var:
    """Element-wise exponential."""
    tape, (a,) = _lift(a)
    out = np.exp(a.value)

    def vjp(g):
        return (g * out,)

    return tape.record("exp", out, (a,), vjp)


def log(a: Operand) -> Var:
    """Element-wise natural logarithm."""
    tape, (a,) = _lift(a)
    av = a.value
    if np.any(av <= 0.):
        raise DomainError("Operation 'log': the input has non-positive entries.")

    def vjp(g):
        return (g / av,)

    return tape.record("log", np.log(av), (a,), vjp)


def square(a: Operand) -> Var:
    """Element-wise square."""
    tape, (a,) = _lift(a)
    av = a.value

    def vjp(g):
        return (2. * g * av,)

    return tape.record("square", av * av, (a,), vjp)


def relu(a: Operand) -> Var:
    """Element-wise max(a, 0). The gradient at zero is zero."""
    tape, (a,) = _lift(a)
    positive = a.value > 0.

    def vjp(g):
        return (np.where(positive, g, 0.),)

    return tape.record("relu", np.where(positive, a.value, 0.), (a,), vjp)


def softmax(a: Operand, axis: int = -1) -> Var:
    """The softmax along an axis."""
    tape, (a,) = _lift(a)
    shifted = a.value - np.max(a.value, axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / np.sum(e, axis=axis, keepdims=True)

    def vjp(g):
        return (out * (g - np.sum(g * out, axis=axis, keepdims=True)),)

    return tape.record("softmax", out, (a,), vjp)


def row_softmax(a: Operand) -> Var:
    """The softmax of each row."""
    return softmax(a, axis=-1)


def sum(a: Operand, axis: int = None, keepdims: bool = False) -> Var:
    """Sum over an axis. Without an axis, sum all the entries into a 1 x 1 result."""
    tape, (a,) = _lift(a)
    shape = a.shape
    if axis is None:
        out = np.sum(a.value).reshape(1, 1)

        def vjp(g):
            return (np.full(shape, g.reshape(())),)
    else:
        out = np.sum(a.value, axis=axis, keepdims=keepdims)

        def vjp(g):
            if not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, shape).copy(),)

    return tape.record("sum", out, (a,), vjp)


def row_sum(a: Operand) -> Var:
    """Sum of each row, keeping a column."""
    return sum(a, axis=-1, keepdims=True)


def col_sum(a: Operand) -> Var:
    """Sum of each column, keeping a row."""
    return sum(a, axis=-2, keepdims=True)


def sum_all(a: Operand) -> Var:
    """Sum of all the entries as a 1 x 1 variable."""
    return sum(a)


def row_max(a: Operand) -> Var:
    """The maximum of each row, keeping a column. The gradient goes to the first maximal entry."""
    tape, (a,) = _lift(a)
    av = a.value
    arg = np.argmax(av, axis=-1)[..., None]
    out = np.take_along_axis(av, arg, axis=-1)

    def vjp(g):
        grad = np.zeros_like(av)
        np.put_along_axis(grad, arg, g, axis=-1)
        return (grad,)

    return tape.record("row_max", out, (a,), vjp)


def gather_columns(a: Operand, indices: tp.Sequence[int]) -> Var:
    """Take the columns with the indices along the last axis."""
    tape, (a,) = _lift(a)
    indices = np.asarray(indices, dtype=int)
    ncol = a.shape[-1]
    if indices.size and (indices.min() < -ncol or indices.max() >= ncol):
        raise ShapeError("Operation 'gather_columns': indices out of range for {} columns.".format(ncol))

    def vjp(g):
        grad = np.zeros(a.shape)
        np.add.at(np.moveaxis(grad, -1, 0), indices, np.moveaxis(g, -1, 0))
        return (grad,)

    return tape.record("gather_columns", a.value[..., indices], (a,), vjp)


def take_along_rows(a: Operand, indices: ndarray) -> Var:
    """Take a different set of columns in each row of a matrix: out[i, j] = a[i, indices[i, j]]."""
    tape, (a,) = _lift(a)
    indices = np.asarray(indices, dtype=int)
    if a.ndim != 2 or indices.ndim != 2 or indices.shape[0] != a.shape[0]:
        raise ShapeError("Operation 'take_along_rows' needs a (n, p) matrix and (n, r) indices, got {} and {}.".format(
            a.shape, indices.shape))
    ncol = a.shape[1]
    if indices.size and (indices.min() < 0 or indices.max() >= ncol):
        raise ShapeError("Operation 'take_along_rows': indices out of range for {} columns.".format(ncol))
    rows = np.arange(a.shape[0])[:, None]

    def vjp(g):
        grad = np.zeros(a.shape)
        np.add.at(grad, (rows, indices), g)
        return (grad,)

    return tape.record("take_along_rows", a.value[rows, indices], (a,), vjp)


def set_masked(a: Operand, mask: ndarray, value: float) -> Var:
    """Replace the entries under the mask by a constant. The masked entries receive no gradient."""
    tape, (a,) = _lift(a)
    mask = np.asarray(mask, dtype=bool)
    try:
        mask = np.broadcast_to(mask, a.shape)
    except ValueError:
        raise ShapeError("Operation 'set_masked': mask of shape {} does not fit {}.".format(mask.shape, a.shape))

    def vjp(g):
        return (np.where(mask, 0., g),)

    return tape.record("set_masked", np.where(mask, value, a.value), (a,), vjp)


def quad_trace(x: Operand, lap: Operand) -> Var:
    """The quadratic form trace tr(x.T @ lap @ x) as a 1 x 1 variable."""
    tape, (x, lap) = _lift(x, lap)
    if x.ndim != 2 or lap.ndim != 2 or lap.shape != (x.shape[0], x.shape[0]):
        raise ShapeError("Operation 'quad_trace' needs x (n, m) and lap (n, n), got {} and {}.".format(
            x.shape, lap.shape))
    xv, lv = x.value, lap.value
    out = np.sum(xv * (lv @ xv)).reshape(1, 1)

    def vjp(g):
        c = g.reshape(())
        return c * ((lv + lv.T) @ xv), c * (xv @ xv.T)

    return tape.record("quad_trace", out, (x, lap), vjp)


def sq_dists(x: Operand) -> Var:
    """The matrix of squared Euclidean distances between the rows of x."""
    tape, (x,) = _lift(x)
    if x.ndim != 2:
        raise ShapeError("Operation 'sq_dists' needs a matrix, got shape {}.".format(x.shape))
    xv = x.value

    def vjp(g):
        sym = g + g.T
        return (2. * (np.sum(sym, axis=1, keepdims=True) * xv - sym @ xv),)

    return tape.record("sq_dists", linalg.pairwise_sq_dists(xv), (x,), vjp)


def cholesky(a: Operand) -> Var:
    """The lower Cholesky factor of a symmetric positive definite matrix."""
    tape, (a,) = _lift(a)
    lower = linalg.cholesky(a.value).lower

    def vjp(g):
        phi = np.tril(lower.T @ g)
        phi = 0.5 * (phi + np.tril(phi, -1).T)
        grad = solve_triangular(lower, phi, trans="T", lower=True)
        grad = solve_triangular(lower, grad.T, trans="T", lower=True).T
        return (grad,)

    return tape.record("cholesky", lower, (a,), vjp)


def solve_lower_right(b: Operand, lower: Operand) -> Var:
    """Solve x @ lower.T = b for x, namely b @ inv(lower).T."""
    tape, (b, lower) = _lift(b, lower)
    lv = lower.value
    out = linalg.solve_lower_triangular(lv, b.value, side="right")

    def vjp(g):
        gb = solve_triangular(lv, g.T, trans="T", lower=True).T
        return gb, -np.tril(gb.T @ out)

    return tape.record("solve_lower_right", out, (b, lower), vjp)


def detach(a: Var) -> Var:
    """A constant copy of a variable. The gradient stops here."""
    return a.tape.constant(a.value)


OPS = {
    "add": add,
    "subtract": subtract,
    "multiply": multiply,
    "divide": divide,
    "scale": scale,
    "matmul": matmul,
    "transpose": transpose,
    "reshape": reshape,
    "exp": exp,
    "log": log,
    "square": square,
    "relu": relu,
    "softmax": softmax,
    "row_softmax": row_softmax,
    "sum": sum,
    "row_sum": row_sum,
    "col_sum": col_sum,
    "sum_all": sum_all,
    "row_max": row_max,
    "gather_columns": gather_columns,
    "take_along_rows": take_along_rows,
    "set_masked": set_masked,
    "quad_trace": quad_trace,
    "sq_dists": sq_dists,
    "cholesky": cholesky,
    "solve_lower_right": solve_lower_right,
}
