# superdec/models/attention.py
"""
CBAM attention.

Channel gate then spatial gate, both multiplicative:

    M_c = sigmoid(mlp(avgpool(x)) + mlp(maxpool(x)))      [B, C, 1, 1]
    x'  = M_c * x
    M_s = sigmoid(conv_k([mean_c(x'); max_c(x')]))        [B, 1, H, W]
    y   = M_s * x'

Gates lie in (0, 1), so |y| <= |x| elementwise and cbam(0) = 0. Over
stacked wavelet bands the channel gate weighs LL/LH/HL/HH slices jointly,
which keeps the bands consistent with each other.
"""

from typing import List, Tuple

from superdec.core.exceptions import ShapeError
from superdec.models.layers import Conv2d
from superdec.models.module import Module, Shape
from superdec.models.profiling import (
    ACTIVATION_MACS,
    ELEMENTWISE_MACS,
    linear_row,
    move_row,
    pool_row,
)
from superdec.schemas.model_spec import CbamSpec
from superdec.schemas.reports import MacRow
from superdec.tensor import functional as F
from superdec.tensor.tensor import Tensor


class Cbam(Module):
    """Convolutional block attention over C channels."""

    def __init__(self, spec: CbamSpec, dtype=None):
        self.spec = spec
        hidden = spec.hidden_channels
        self.mlp_in = Conv2d(spec.channels, hidden, 1, bias=False, dtype=dtype)
        self.mlp_out = Conv2d(hidden, spec.channels, 1, bias=False, dtype=dtype)
        self.spatial = Conv2d(2, 1, spec.spatial_kernel, bias=False, dtype=dtype)

    def _mlp(self, pooled: Tensor) -> Tensor:
        return self.mlp_out(F.relu(self.mlp_in(pooled)))

    def attention_maps(self, x: Tensor) -> Tuple[Tensor, Tensor, Tensor]:
        """Returns (M_c, M_s, channel-gated x)."""
        if x.ndim != 4 or x.shape[1] != self.spec.channels:
            raise ShapeError("cbam channel mismatch", dimension="C", expected=self.spec.channels,
                             actual=x.shape[1] if x.ndim == 4 else x.shape)
        channel_gate = F.sigmoid(
            F.add(self._mlp(F.pool("global_avg", x)), self._mlp(F.pool("global_max", x)))
        )
        gated = F.mul(F.expand(channel_gate, x.shape), x)
        descriptor = F.concat_channels([
            F.pool("spatial_mean_over_channels", gated),
            F.pool("spatial_max_over_channels", gated),
        ])
        spatial_gate = F.sigmoid(self.spatial(descriptor))
        return channel_gate, spatial_gate, gated

    def forward(self, x: Tensor) -> Tensor:
        _, spatial_gate, gated = self.attention_maps(x)
        return F.mul(F.expand(spatial_gate, gated.shape), gated)

    def profile(self, input_shape: Shape, prefix: str = "") -> Tuple[Shape, List[MacRow]]:
        B, C, H, W = input_shape
        pooled = (B, C, 1, 1)
        rows: List[MacRow] = [
            pool_row(f"{prefix}avgpool", "global_avg", input_shape, pooled),
            pool_row(f"{prefix}maxpool", "global_max", input_shape, pooled),
        ]
        for branch in ("avg", "max"):
            hidden_shape, r1 = self.mlp_in.profile(pooled, f"{prefix}mlp_in.{branch}.")
            _, r2 = self.mlp_out.profile(hidden_shape, f"{prefix}mlp_out.{branch}.")
            if branch == "max":
                # weights are shared between the two branches
                r1[0] = r1[0].model_copy(update={"params": 0})
                r2[0] = r2[0].model_copy(update={"params": 0})
            rows += r1 + [linear_row(f"{prefix}mlp_relu.{branch}", "relu", hidden_shape, hidden_shape,
                                     ACTIVATION_MACS)] + r2
        rows += [
            linear_row(f"{prefix}channel_add", "add", pooled, pooled, ELEMENTWISE_MACS),
            linear_row(f"{prefix}channel_sigmoid", "sigmoid", pooled, pooled, ACTIVATION_MACS),
            linear_row(f"{prefix}channel_gate", "mul", input_shape, input_shape, ELEMENTWISE_MACS),
            pool_row(f"{prefix}channel_mean", "spatial_mean_over_channels", input_shape, (B, 1, H, W)),
            pool_row(f"{prefix}channel_max", "spatial_max_over_channels", input_shape, (B, 1, H, W)),
            move_row(f"{prefix}descriptor", "concat", (B, 1, H, W), (B, 2, H, W)),
        ]
        gate_shape, spatial_rows = self.spatial.profile((B, 2, H, W), f"{prefix}spatial.")
        rows += spatial_rows + [
            linear_row(f"{prefix}spatial_sigmoid", "sigmoid", gate_shape, gate_shape, ACTIVATION_MACS),
            linear_row(f"{prefix}spatial_gate", "mul", input_shape, input_shape, ELEMENTWISE_MACS),
        ]
        return tuple(input_shape), rows
