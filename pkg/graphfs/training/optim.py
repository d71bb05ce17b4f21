"""The Adam optimizer on numpy arrays."""
import typing as tp

import numpy as np
from numpy import ndarray

from graphfs.errors import NumericError, ShapeError

__all__ = ["AdamState", "adam_step", "Adam", "BETA1", "BETA2", "EPS"]

BETA1 = 0.9
BETA2 = 0.999
EPS = 1e-8


class AdamState:
    """The moment estimates of Adam for one parameter.

    Attributes
    ----------
    m : ndarray
        The first moment estimate.

    v : ndarray
        The second moment estimate.

    t : int
        The number of steps taken.
    """

    def __init__(self, m: ndarray, v: ndarray, t: int = 0):
        self.m = m
        self.v = v
        self.t = t

    @classmethod
    def zeros(cls, shape: tp.Tuple[int, ...]) -> "AdamState":
        return cls(np.zeros(shape), np.zeros(shape), 0)


def adam_step(
    params: ndarray, grads: ndarray, state: AdamState, lr: float, epoch: int = None
) -> tp.Tuple[ndarray, AdamState]:
    """Take one bias corrected Adam step with beta1 0.9, beta2 0.999 and eps 1e-8.

    Parameters
    ----------
    params : ndarray
        The parameters.

    grads : ndarray
        The gradient of the loss with respect to the parameters.

    state : AdamState
        The state after the previous step.

    lr : float
        The learning rate.

    epoch : int
        The epoch reported when the gradient is not finite.

    Returns
    -------
    params : ndarray
        The new parameters.

    state : AdamState
        The new state. The input state is not modified.
    """
    if grads.shape != params.shape:
        raise ShapeError("The gradient of shape {} does not fit the parameters of shape {}.".format(
            grads.shape, params.shape))
    if not np.all(np.isfinite(grads)):
        where = "" if epoch is None else " at epoch {}".format(epoch)
        raise NumericError("The gradient is not finite{}.".format(where))
    t = state.t + 1
    m = BETA1 * state.m + (1. - BETA1) * grads
    v = BETA2 * state.v + (1. - BETA2) * grads * grads
    m_hat = m / (1. - BETA1 ** t)
    v_hat = v / (1. - BETA2 ** t)
    return params - lr * m_hat / (np.sqrt(v_hat) + EPS), AdamState(m, v, t)


class Adam:
    """Adam over a list of parameters updated in place."""

    def __init__(self, params: tp.List[ndarray], lr: float):
        self.params = params
        self.lr = lr
        self.states = [AdamState.zeros(p.shape) for p in params]

    def step(self, grads: tp.List[tp.Optional[ndarray]], epoch: int = None) -> None:
        for i, (param, grad) in enumerate(zip(self.params, grads)):
            if grad is None:
                grad = np.zeros_like(param)
            new, self.states[i] = adam_step(param, grad, self.states[i], self.lr, epoch=epoch)
            param[...] = new
