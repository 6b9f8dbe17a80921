# superdec/models/layers.py
"""
Convolution layers.

Conv2d owns a weight and an optional bias and initializes them He-uniform
(bound sqrt(6 / fan_in)) times a gain, with zero biases. A gain of 0 gives
the zero-initialized layers used to start SUPER stages at exact
reconstruction.
"""

import math
from typing import List, Optional, Tuple

import numpy as np

from superdec.models.module import Module, Shape, parameter_rng
from superdec.models.profiling import ACTIVATION_MACS, conv_row, linear_row
from superdec.schemas.model_spec import DoubleConvSpec
from superdec.schemas.reports import MacRow
from superdec.tensor import functional as F
from superdec.tensor.tensor import Parameter, Tensor, resolve_dtype


class Conv2d(Module):
    """Stride-1 'same' convolution with an odd square kernel."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int = 3, bias: bool = True,
                 init_gain: float = 1.0, dtype=None):
        if kernel_size % 2 == 0:
            raise ValueError("kernel_size must be odd")
        dtype = resolve_dtype(dtype)
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.padding = kernel_size // 2
        self.init_gain = init_gain
        self.weight = Parameter(np.zeros((out_channels, in_channels, kernel_size, kernel_size), dtype=dtype))
        self.bias: Optional[Parameter] = Parameter(np.zeros(out_channels, dtype=dtype)) if bias else None

    def initialize(self, seed: int, prefix: str = "") -> "Conv2d":
        path = f"{prefix}weight"
        fan_in = self.in_channels * self.kernel_size * self.kernel_size
        bound = self.init_gain * math.sqrt(6.0 / fan_in)
        rng = parameter_rng(seed, path)
        values = rng.uniform(-bound, bound, size=self.weight.shape) if bound > 0 else np.zeros(self.weight.shape)
        self.weight.data = values.astype(self.weight.dtype)
        if self.bias is not None:
            self.bias.data = np.zeros_like(self.bias.data)
        return self

    def forward(self, x: Tensor) -> Tensor:
        return F.conv2d(x, self.weight, self.bias, stride=1, padding=self.padding)

    def profile(self, input_shape: Shape, prefix: str = "") -> Tuple[Shape, List[MacRow]]:
        row = conv_row(prefix.rstrip("."), input_shape, self.out_channels, self.kernel_size, self.padding,
                       params=self.weight.size + (self.bias.size if self.bias is not None else 0))
        return row.output_shape, [row]


class DoubleConv(Module):
    """conv3x3 -> relu -> conv3x3 [-> relu]; preserves H and W."""

    def __init__(self, spec: DoubleConvSpec, final_gain: Optional[float] = None, dtype=None):
        self.spec = spec
        if final_gain is None:
            final_gain = 0.0 if spec.zero_init_final else 1.0
        self.conv1 = Conv2d(spec.in_channels, spec.out_channels, 3, dtype=dtype)
        self.conv2 = Conv2d(spec.out_channels, spec.out_channels, 3, init_gain=final_gain, dtype=dtype)

    def forward(self, x: Tensor) -> Tensor:
        h = F.relu(self.conv1(x))
        h = self.conv2(h)
        return F.relu(h) if self.spec.final_relu else h

    def profile(self, input_shape: Shape, prefix: str = "") -> Tuple[Shape, List[MacRow]]:
        shape, rows = self.conv1.profile(input_shape, f"{prefix}conv1.")
        rows.append(linear_row(f"{prefix}relu1", "relu", shape, shape, ACTIVATION_MACS))
        shape, conv2_rows = self.conv2.profile(shape, f"{prefix}conv2.")
        rows.extend(conv2_rows)
        if self.spec.final_relu:
            rows.append(linear_row(f"{prefix}relu2", "relu", shape, shape, ACTIVATION_MACS))
        return shape, rows
