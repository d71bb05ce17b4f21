"""The tape that records the operations on dense arrays and runs the reverse pass."""
import typing as tp

import numpy as np
from numpy import ndarray

from graphfs.errors import ShapeError, GraphfsError

__all__ = ["Tape", "Var", "Node", "VJP"]

VJP = tp.Callable[[ndarray], tp.Sequence[tp.Optional[ndarray]]]


def _owned(value: tp.Any) -> ndarray:
    """Make a read-only float64 copy that the tape owns."""
    arr = np.array(value, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


def _frozen(value: ndarray) -> ndarray:
    """Freeze a freshly computed array without copying it."""
    arr = np.asarray(value, dtype=np.float64)
    if arr.flags.writeable and arr.flags.owndata:
        arr.setflags(write=False)
        return arr
    return _owned(arr)


class Var:
    """A value on a tape.

    Attributes
    ----------
    tape : Tape
        The tape that the value is recorded on.

    index : int
        The position of the value on the tape. Inputs always have smaller indexes than outputs.

    value : ndarray
        The read-only forward value.

    requires_grad : bool
        If True, the gradient with respect to this value is tracked.

    name : str
        An optional name used in error messages.
    """

    __array_ufunc__ = None

    def __init__(self, tape: "Tape", index: int, value: ndarray, requires_grad: bool, name: str = None):
        self.tape = tape
        self.index = index
        self.value = value
        self.requires_grad = requires_grad
        self.name = name
        self.generation = tape.generation
        self.grad: tp.Optional[ndarray] = None

    def __repr__(self):
        return "Var(index={}, shape={}, requires_grad={})".format(self.index, self.shape, self.requires_grad)

    @property
    def shape(self) -> tp.Tuple[int, ...]:
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    @property
    def T(self) -> "Var":
        from graphfs.autodiff import ops
        return ops.transpose(self)

    def item(self) -> float:
        """The value of a single element variable as a float."""
        if self.value.size != 1:
            raise ShapeError("Only single element variables can be converted, got shape {}.".format(self.shape))
        return float(self.value.reshape(()))

    def __add__(self, other):
        from graphfs.autodiff import ops
        return ops.add(self, other)

    def __radd__(self, other):
        from graphfs.autodiff import ops
        return ops.add(other, self)

    def __sub__(self, other):
        from graphfs.autodiff import ops
        return ops.subtract(self, other)

    def __rsub__(self, other):
        from graphfs.autodiff import ops
        return ops.subtract(other, self)

    def __mul__(self, other):
        from graphfs.autodiff import ops
        return ops.multiply(self, other)

    def __rmul__(self, other):
        from graphfs.autodiff import ops
        return ops.multiply(other, self)

    def __truediv__(self, other):
        from graphfs.autodiff import ops
        return ops.divide(self, other)

    def __rtruediv__(self, other):
        from graphfs.autodiff import ops
        return ops.divide(other, self)

    def __matmul__(self, other):
        from graphfs.autodiff import ops
        return ops.matmul(self, other)

    def __rmatmul__(self, other):
        from graphfs.autodiff import ops
        return ops.matmul(other, self)

    def __neg__(self):
        from graphfs.autodiff import ops
        return ops.scale(self, -1.)


class Node:
    """A recorded operation: the output index, the inputs and the vector-Jacobian product."""

    __slots__ = ("op", "output", "inputs", "vjp")

    def __init__(self, op: str, output: int, inputs: tp.Sequence[Var], vjp: VJP):
        self.op = op
        self.output = output
        self.inputs = tuple(inputs)
        self.vjp = vjp


class Tape:
    """An append-only record of operations for the reverse mode differentiation.

    Only the operations that depend on a leaf requiring gradient are recorded. A tape is used by one
    thread. Clearing the tape invalidates all the variables created on it.
    """

    def __init__(self):
        self.nodes: tp.List[Node] = []
        self.generation = 0
        self._count = 0

    def __len__(self):
        return len(self.nodes)

    def _new_index(self) -> int:
        index = self._count
        self._count += 1
        return index

    def leaf(self, value: tp.Any, requires_grad: bool = True, name: str = None) -> Var:
        """Add an input to the tape. The value is copied."""
        return Var(self, self._new_index(), _owned(value), requires_grad, name=name)

    def constant(self, value: tp.Any, name: str = None) -> Var:
        """Add an input that does not require gradient."""
        return self.leaf(value, requires_grad=False, name=name)

    def lift(self, value: tp.Any) -> Var:
        """Return the input if it is a variable on this tape, otherwise wrap it as a constant."""
        if isinstance(value, Var):
            self.check(value)
            return value
        return self.constant(value)

    def check(self, var: Var) -> None:
        """Check that the variable lives on the current generation of this tape."""
        if var.tape is not self:
            raise GraphfsError("Variable {} belongs to another tape.".format(var))
        if var.generation != self.generation:
            raise GraphfsError("Variable {} was recorded before the tape was cleared.".format(var))

    def record(self, op: str, value: ndarray, inputs: tp.Sequence[Var], vjp: VJP) -> Var:
        """Record the output of an operation.

        Parameters
        ----------
        op :
            The name of the operation.

        value :
            The forward value. It must not be modified afterwards.

        inputs :
            The input variables in the order of the gradients returned by vjp.

        vjp :
            A function mapping the gradient of the output to the gradients of the inputs. A None gradient
            means no contribution.

        Returns
        -------
        var :
            The output variable.
        """
        for var in inputs:
            self.check(var)
        value = _frozen(value)
        requires_grad = any(var.requires_grad for var in inputs)
        out = Var(self, self._new_index(), value, requires_grad)
        if requires_grad:
            self.nodes.append(Node(op, out.index, inputs, vjp))
        return out

    def clear(self) -> None:
        """Drop all the recorded operations."""
        self.nodes = []
        self.generation += 1

    def backward(self, loss: Var) -> tp.Dict[Var, ndarray]:
        """Back-propagate from a single element loss.

        Parameters
        ----------
        loss :
            A 1 x 1 variable on this tape.

        Returns
        -------
        grads :
            The mapping from every leaf that requires gradient and is reached by the loss to its gradient.
            The gradients are also stored in the 'grad' attribute of the leaves.
        """
        self.check(loss)
        if loss.value.size != 1:
            raise ShapeError("The loss must be a single element, got shape {}.".format(loss.shape))
        if not loss.requires_grad:
            return {}
        grads: tp.Dict[int, ndarray] = {loss.index: np.ones_like(loss.value)}
        leaves: tp.Dict[int, Var] = {loss.index: loss}
        for node in reversed(self.nodes):
            if node.output not in grads:
                continue
            g = grads.pop(node.output)
            input_grads = node.vjp(g)
            for var, gin in zip(node.inputs, input_grads):
                if gin is None or not var.requires_grad:
                    continue
                if gin.shape != var.shape:
                    raise ShapeError(
                        "Operation '{}' returns a gradient of shape {} for an input of shape {}.".format(
                            node.op, gin.shape, var.shape)
                    )
                if var.index in grads:
                    grads[var.index] = grads[var.index] + gin
                else:
                    grads[var.index] = gin
                    leaves.setdefault(var.index, var)
        result = {}
        for index, var in leaves.items():
            if index in grads:
                var.grad = grads[index]
                result[var] = grads[index]
        return result
