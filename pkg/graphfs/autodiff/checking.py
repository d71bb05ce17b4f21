"""Compare the reverse mode gradients with the central finite differences."""
import typing as tp

import numpy as np
from numpy import ndarray

from graphfs.autodiff.tape import Tape, Var
from graphfs.errors import ShapeError

__all__ = ["numerical_gradient", "analytic_gradient", "gradcheck"]

ScalarFunc = tp.Callable[[Var], Var]


def _evaluate(func: ScalarFunc, point: ndarray) -> float:
    tape = Tape()
    out = func(tape.leaf(point, requires_grad=False))
    if out.value.size != 1:
        raise ShapeError("The function must return a single element, got shape {}.".format(out.shape))
    return out.item()


def numerical_gradient(func: ScalarFunc, point: ndarray, h: float = 1e-6) -> ndarray:
    """The central difference gradient of a scalar function built from the operations."""
    point = np.array(point, dtype=np.float64)
    grad = np.zeros_like(point)
    for idx in np.ndindex(*point.shape):
        orig = point[idx]
        point[idx] = orig + h
        plus = _evaluate(func, point)
        point[idx] = orig - h
        minus = _evaluate(func, point)
        point[idx] = orig
        grad[idx] = (plus - minus) / (2. * h)
    return grad


def analytic_gradient(func: ScalarFunc, point: ndarray) -> ndarray:
    """The gradient from the reverse pass. It is zero when the output does not depend on the input."""
    tape = Tape()
    x = tape.leaf(point)
    tape.backward(func(x))
    return x.grad if x.grad is not None else np.zeros(x.shape)


def gradcheck(func: ScalarFunc, point: ndarray, h: float = 1e-6) -> float:
    """The largest relative difference between the analytic and the numerical gradients.

    The difference of each entry is divided by max(1, |numerical|).

    Parameters
    ----------
    func :
        A function of one variable returning a single element variable.

    point :
        The point to check the gradient at.

    h :
        The finite difference step.

    Returns
    -------
    error :
        The maximal relative difference.
    """
    analytic = analytic_gradient(func, point)
    numeric = numerical_gradient(func, point, h=h)
    if analytic.size == 0:
        return 0.
    return float(np.max(np.abs(analytic - numeric) / np.maximum(1., np.abs(numeric))))
