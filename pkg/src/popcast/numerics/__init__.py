"""Numerical kernels: autograd tensors, least squares, simplex search, Adam."""

from popcast.numerics.autograd import (
    Tensor,
    affine,
    backward,
    concat,
    constant,
    layer_norm,
    mse_loss,
    parameter,
    zero_grads,
)
from popcast.numerics.optim import AdamState, adam_step, nelder_mead, ols_fit

__all__ = [
    "Tensor",
    "affine",
    "backward",
    "concat",
    "constant",
    "layer_norm",
    "mse_loss",
    "parameter",
    "zero_grads",
    "AdamState",
    "adam_step",
    "nelder_mead",
    "ols_fit",
]
