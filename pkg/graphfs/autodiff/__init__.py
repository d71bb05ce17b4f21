"""Reverse mode automatic differentiation on dense arrays."""
from graphfs.autodiff.tape import Tape, Var, Node
from graphfs.autodiff.checking import gradcheck, numerical_gradient, analytic_gradient
from graphfs.autodiff import ops

Tape = Tape
Var = Var
Node = Node
gradcheck = gradcheck
numerical_gradient = numerical_gradient
analytic_gradient = analytic_gradient
ops = ops
