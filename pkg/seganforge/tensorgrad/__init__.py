"""Reverse-mode automatic differentiation over the SEGAN operation set"""

from seganforge.tensorgrad.gradcheck import gradcheck
from seganforge.tensorgrad.ops import (
    add,
    concat_channels,
    conv1d,
    conv1d_output_length,
    conv_transpose1d,
    conv_transpose1d_output_length,
    l1_loss,
    leaky_relu,
    mse_loss,
    prelu,
    reshape,
    scale,
    tanh,
)
from seganforge.tensorgrad.optim import RMSprop, rmsprop_step
from seganforge.tensorgrad.tensor import (
    Parameter,
    Tensor,
    float64_shadow,
    get_default_dtype,
    no_grad,
    parameter,
)

__all__ = [
    "Parameter",
    "RMSprop",
    "Tensor",
    "add",
    "concat_channels",
    "conv1d",
    "conv1d_output_length",
    "conv_transpose1d",
    "conv_transpose1d_output_length",
    "float64_shadow",
    "get_default_dtype",
    "gradcheck",
    "l1_loss",
    "leaky_relu",
    "mse_loss",
    "no_grad",
    "parameter",
    "prelu",
    "reshape",
    "rmsprop_step",
    "scale",
    "tanh",
]
