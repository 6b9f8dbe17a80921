"""
Tensor Package

Minimal dense-tensor engine with reverse-mode automatic differentiation.
"""

from superdec.tensor.tensor import (
    DTYPES,
    Function,
    Graph,
    Parameter,
    Tensor,
    backward,
    no_grad,
    resolve_dtype,
)
from superdec.tensor.functional import (
    avg_pool2x2,
    channel_slice,
    chunk_channels,
    concat_channels,
    conv2d,
    elementwise,
    expand,
    mean_all,
    pool,
    relu,
    scale,
    sigmoid,
    sum_all,
    upsample,
)
from superdec.tensor.gradcheck import grad_check, grad_check_parameters
from superdec.tensor.optim import Adam, AdamState, adam_step

__all__ = [
    "DTYPES",
    "Function",
    "Graph",
    "Parameter",
    "Tensor",
    "backward",
    "no_grad",
    "resolve_dtype",
    "avg_pool2x2",
    "channel_slice",
    "chunk_channels",
    "concat_channels",
    "conv2d",
    "elementwise",
    "expand",
    "mean_all",
    "pool",
    "relu",
    "scale",
    "sigmoid",
    "sum_all",
    "upsample",
    "grad_check",
    "grad_check_parameters",
    "Adam",
    "AdamState",
    "adam_step",
]
