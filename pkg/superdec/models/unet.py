# superdec/models/unet.py
"""
Toy U-Net

L encoder stages with doubling widths c_k = stem * 2^(k-1), a bottleneck
DoubleConv at 1/2^L resolution, L decoder stages of one kind and a 1x1
head to a single channel.

Decoder stage k receives the skip of encoder stage k (width c_k, full
resolution of that level) and the output of stage k+1 (or the bottleneck
for k = L), width c_{k+1} at half resolution.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from superdec.core.exceptions import ShapeError
from superdec.models.blocks import BaselineDecoderStage, EncoderStage, SuperBlock
from superdec.models.layers import Conv2d, DoubleConv
from superdec.models.module import Module, Shape, StageList
from superdec.schemas.model_spec import DecoderKind, DoubleConvSpec, FdInit, ModelSpec
from superdec.schemas.reports import MacRow
from superdec.tensor.tensor import Tensor

logger = logging.getLogger(__name__)


@dataclass
class ModelTrace:
    """Intermediate tensors of one forward pass. Lists are stage 1 first."""
    skips: List[Tensor]
    bottom: Tensor
    stage_outputs: List[Tensor]
    output: Tensor
    residuals: List[Optional[Tensor]] = field(default_factory=list)


class UNet(Module):
    """Encoder / bottleneck / decoder / head assembled from a ModelSpec."""

    def __init__(self, spec: ModelSpec, dtype=None):
        self.spec = spec
        widths = spec.widths
        L = spec.depth
        in_widths = [spec.in_channels] + widths[:L - 1]
        self.enc = StageList([EncoderStage(in_widths[k], widths[k], dtype=dtype) for k in range(L)])
        self.bottleneck = DoubleConv(DoubleConvSpec(in_channels=widths[L - 1], out_channels=widths[L]), dtype=dtype)
        self.dec = StageList([self._decoder_stage(k, dtype) for k in range(1, L + 1)])
        self.head = Conv2d(widths[0], 1, 1, bias=True, dtype=dtype)

    def _decoder_stage(self, k: int, dtype) -> Module:
        spec = self.spec
        widths = spec.widths
        if spec.decoder_kind == DecoderKind.BASELINE:
            return BaselineDecoderStage(widths[k - 1], widths[k], upsample_mode=spec.upsample_mode, dtype=dtype)
        gain = 0.0 if spec.fd_init == FdInit.ZERO else spec.fd_init_gain
        return SuperBlock(spec.stage_config(k), fd_final_gain=gain, dtype=dtype)

    @property
    def is_super(self) -> bool:
        return self.spec.decoder_kind == DecoderKind.SUPER

    def check_input_shape(self, shape: Tuple[int, ...]) -> None:
        if len(shape) != 4:
            raise ShapeError("model input must be [B, C, H, W]", dimension="rank", expected=4, actual=len(shape))
        if shape[1] != self.spec.in_channels:
            raise ShapeError("model input channels", dimension="C", expected=self.spec.in_channels, actual=shape[1])
        multiple = self.spec.size_multiple
        for axis, name in ((2, "H"), (3, "W")):
            if shape[axis] < multiple or shape[axis] % multiple:
                raise ShapeError(f"input extent must be divisible by 2^depth = {multiple}", dimension=name,
                                 expected=f"multiple of {multiple}", actual=shape[axis])

    def encode(self, x: Tensor) -> Tuple[List[Tensor], Tensor]:
        """Returns (skips stage 1 first, bottleneck output)."""
        self.check_input_shape(x.shape)
        skips: List[Tensor] = []
        h = x
        for k in range(1, len(self.enc) + 1):
            features, h = self.enc[k](h)
            skips.append(features)
        return skips, self.bottleneck(h)

    def decode(self, skips: List[Tensor], bottom: Tensor) -> Tensor:
        """Decoder map (skips, bottleneck) -> x_d^1."""
        return self._decode(skips, bottom)[0][0]

    def _decode(self, skips: List[Tensor], bottom: Tensor) -> Tuple[List[Tensor], List[Optional[Tensor]]]:
        L = len(self.dec)
        if len(skips) != L:
            raise ShapeError("one skip per decoder stage", dimension="stages", expected=L, actual=len(skips))
        outputs: List[Optional[Tensor]] = [None] * L
        residuals: List[Optional[Tensor]] = [None] * L
        x_d = bottom
        for k in range(L, 0, -1):
            stage = self.dec[k]
            if isinstance(stage, SuperBlock):
                x_d, residuals[k - 1] = stage.forward_with_residual(skips[k - 1], x_d)
            else:
                x_d = stage(skips[k - 1], x_d)
            outputs[k - 1] = x_d
        return outputs, residuals

    def forward(self, x: Tensor) -> Tensor:
        skips, bottom = self.encode(x)
        return self.head(self.decode(skips, bottom))

    def forward_with_trace(self, x: Tensor) -> ModelTrace:
        skips, bottom = self.encode(x)
        outputs, residuals = self._decode(skips, bottom)
        return ModelTrace(skips=skips, bottom=bottom, stage_outputs=outputs,
                          output=self.head(outputs[0]), residuals=residuals)

    def profile(self, input_shape: Shape, prefix: str = "") -> Tuple[Shape, List[MacRow]]:
        rows: List[MacRow] = []
        skip_shapes: List[Shape] = []
        shape = tuple(input_shape)
        for k in range(1, len(self.enc) + 1):
            conv_shape, stage_rows = self.enc[k].profile(shape, f"{prefix}enc.stage{k}.")
            rows += stage_rows
            B, _, H, W = conv_shape
            skip_shapes.append((B, self.spec.widths[k - 1], 2 * H, 2 * W))
            shape = conv_shape
        shape, bottleneck_rows = self.bottleneck.profile(shape, f"{prefix}bottleneck.")
        rows += bottleneck_rows
        for k in range(len(self.dec), 0, -1):
            shape, stage_rows = self.dec[k].profile(skip_shapes[k - 1], shape, prefix=f"{prefix}dec.stage{k}.")
            rows += stage_rows
        shape, head_rows = self.head.profile(shape, f"{prefix}head.")
        return shape, rows + head_rows


def build_model(spec: ModelSpec, seed: int, dtype=None) -> UNet:
    """Build a UNet with named, deterministically initialized parameters."""
    model = UNet(spec, dtype=dtype)
    model.assign_names()
    model.initialize(seed)
    logger.debug(f"Built {spec.decoder_kind.value} model: depth {spec.depth}, "
                 f"{model.num_parameters()} parameters, seed {seed}")
    return model
