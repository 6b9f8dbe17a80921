# superdec/models/blocks.py
"""
Encoder and decoder stages.

EncoderStage      x -> (F_e(x), avgpool2x2(F_e(x)))
SuperBlock        x_e, x_d -> idwt(dwt(x_e) - cbam(F_d(dwt(x_e) (+) x_d)))
BaselineDecoder   x_e, x_d -> F_d([x_e ; upsample(x_d)])

The SUPER stage never upsamples: x_d already sits at the resolution of the
skip's wavelet bands, and fusion happens in the band domain. When the last
convolution of F_d starts at zero the residual is cbam(0) = 0 and the stage
returns its skip exactly.
"""

from typing import List, Optional, Tuple

from superdec.core.exceptions import ShapeError
from superdec.models.attention import Cbam
from superdec.models.layers import Conv2d, DoubleConv
from superdec.models.module import Module, Shape
from superdec.models.profiling import (
    ELEMENTWISE_MACS,
    UPSAMPLE_MACS,
    WAVELET_MACS,
    linear_row,
    move_row,
    pool_row,
)
from superdec.schemas.model_spec import CbamSpec, DoubleConvSpec, FusionMode, SuperBlockConfig, UpsampleMode
from superdec.schemas.reports import MacRow
from superdec.tensor import functional as F
from superdec.tensor.tensor import Tensor
from superdec.wavelet.haar import dwt_stacked, idwt_stacked


def _check_decoder_inputs(x_e: Tensor, x_d: Tensor, skip_channels: int, deeper_channels: int) -> None:
    for name, t in (("x_e", x_e), ("x_d", x_d)):
        if t.ndim != 4:
            raise ShapeError(f"{name} must be [B, C, H, W]", dimension="rank", expected=4, actual=t.ndim)
    if x_e.shape[1] != skip_channels:
        raise ShapeError("skip channel mismatch", dimension="C", expected=skip_channels, actual=x_e.shape[1])
    if x_d.shape[1] != deeper_channels:
        raise ShapeError("deeper channel mismatch", dimension="C", expected=deeper_channels, actual=x_d.shape[1])
    if x_d.shape[0] != x_e.shape[0]:
        raise ShapeError("batch mismatch", dimension="B", expected=x_e.shape[0], actual=x_d.shape[0])
    for axis, name in ((2, "H"), (3, "W")):
        if x_e.shape[axis] % 2 or x_d.shape[axis] * 2 != x_e.shape[axis]:
            raise ShapeError("deeper feature must be exactly half the skip resolution", dimension=name,
                             expected=x_e.shape[axis] / 2, actual=x_d.shape[axis])


class EncoderStage(Module):
    """DoubleConv followed by 2x2 average pooling."""

    def __init__(self, in_channels: int, out_channels: int, dtype=None):
        self.conv = DoubleConv(DoubleConvSpec(in_channels=in_channels, out_channels=out_channels), dtype=dtype)

    def forward(self, x: Tensor) -> Tuple[Tensor, Tensor]:
        if x.ndim == 4 and (x.shape[2] % 2 or x.shape[3] % 2):
            raise ShapeError("encoder stage needs even spatial extents", dimension="H" if x.shape[2] % 2 else "W",
                             expected="even", actual=x.shape[2] if x.shape[2] % 2 else x.shape[3])
        features = self.conv(x)
        return features, F.avg_pool2x2(features)

    def profile(self, input_shape: Shape, prefix: str = "") -> Tuple[Shape, List[MacRow]]:
        shape, rows = self.conv.profile(input_shape, f"{prefix}conv.")
        B, C, H, W = shape
        pooled = (B, C, H // 2, W // 2)
        rows.append(pool_row(f"{prefix}pool", "avg_pool2x2", shape, pooled))
        return pooled, rows


class SuperBlock(Module):
    """
    SUPER decoder stage.

    Decomposes the skip x_e into stacked Haar bands, fuses the deeper
    feature x_d into them, predicts a band-domain residual with F_d and
    CBAM, subtracts it from the bands and synthesizes back to x_e's
    resolution.

    Fusion modes:
        sum_ll: x_d is projected to C channels by a 1x1 conv and added into
                the LL slice; F_d sees 4C channels
        concat: x_d's channels are appended after the bands; F_d sees
                4C + C' channels
    """

    def __init__(self, config: SuperBlockConfig, fd_final_gain: Optional[float] = None, dtype=None):
        self.config = config
        C = config.skip_channels
        if config.fusion == FusionMode.SUM_LL:
            self.proj = Conv2d(config.deeper_channels, C, 1, bias=True, dtype=dtype)
        self.fd = DoubleConv(config.fd_spec, final_gain=fd_final_gain, dtype=dtype)
        if config.use_cbam:
            self.cbam = Cbam(
                CbamSpec(channels=4 * C, reduction=config.cbam_reduction, spatial_kernel=config.cbam_kernel),
                dtype=dtype,
            )

    def fuse(self, bands: Tensor, x_d: Tensor) -> Tensor:
        C = self.config.skip_channels
        if self.config.fusion == FusionMode.SUM_LL:
            ll = F.add(F.channel_slice(bands, 0, C), self.proj(x_d))
            return F.concat_channels([ll, F.channel_slice(bands, C, 4 * C)])
        return F.concat_channels([bands, x_d])

    def forward_with_residual(self, x_e: Tensor, x_d: Tensor) -> Tuple[Tensor, Tensor]:
        """Returns (stage output, band-domain residual res)."""
        cfg = self.config
        _check_decoder_inputs(x_e, x_d, cfg.skip_channels, cfg.deeper_channels)
        bands = dwt_stacked(x_e)
        res = self.fd(self.fuse(bands, x_d))
        if cfg.use_cbam:
            res = self.cbam(res)
        if res.shape[1] != 4 * cfg.skip_channels:
            raise ShapeError("residual must carry one channel per band", dimension="C",
                             expected=4 * cfg.skip_channels, actual=res.shape[1])
        if cfg.use_suppression:
            return idwt_stacked(F.sub(bands, res)), res
        return idwt_stacked(res), res

    def forward(self, x_e: Tensor, x_d: Tensor) -> Tensor:
        return self.forward_with_residual(x_e, x_d)[0]

    def profile(self, input_shape: Shape, deeper_shape: Optional[Shape] = None,
                prefix: str = "") -> Tuple[Shape, List[MacRow]]:
        cfg = self.config
        B, C, H, W = input_shape
        C4 = 4 * C
        band_shape = (B, C4, H // 2, W // 2)
        deeper_shape = deeper_shape or (B, cfg.deeper_channels, H // 2, W // 2)
        rows = [linear_row(f"{prefix}dwt", "dwt", input_shape, band_shape, WAVELET_MACS)]
        if cfg.fusion == FusionMode.SUM_LL:
            ll_shape = (B, C, H // 2, W // 2)
            _, proj_rows = self.proj.profile(deeper_shape, f"{prefix}proj.")
            rows += proj_rows
            rows += [
                move_row(f"{prefix}ll_slice", "slice", band_shape, ll_shape),
                linear_row(f"{prefix}ll_add", "add", ll_shape, ll_shape, ELEMENTWISE_MACS),
                move_row(f"{prefix}fuse", "concat", ll_shape, band_shape),
            ]
            fused = band_shape
        else:
            fused = (B, C4 + cfg.deeper_channels, H // 2, W // 2)
            rows.append(move_row(f"{prefix}fuse", "concat", band_shape, fused))
        res_shape, fd_rows = self.fd.profile(fused, f"{prefix}fd.")
        rows += fd_rows
        if cfg.use_cbam:
            res_shape, cbam_rows = self.cbam.profile(res_shape, f"{prefix}cbam.")
            rows += cbam_rows
        if cfg.use_suppression:
            rows.append(linear_row(f"{prefix}suppress", "sub", band_shape, band_shape, ELEMENTWISE_MACS))
        rows.append(linear_row(f"{prefix}idwt", "idwt", band_shape, tuple(input_shape), WAVELET_MACS))
        return tuple(input_shape), rows


class BaselineDecoderStage(Module):
    """Upsample x_d by 2, concatenate after x_e, DoubleConv back to C channels."""

    def __init__(self, skip_channels: int, deeper_channels: int,
                 upsample_mode: UpsampleMode = UpsampleMode.BILINEAR, dtype=None):
        self.skip_channels = skip_channels
        self.deeper_channels = deeper_channels
        self.upsample_mode = UpsampleMode(upsample_mode)
        self.fd = DoubleConv(
            DoubleConvSpec(in_channels=skip_channels + deeper_channels, out_channels=skip_channels),
            dtype=dtype,
        )

    def forward(self, x_e: Tensor, x_d: Tensor) -> Tensor:
        _check_decoder_inputs(x_e, x_d, self.skip_channels, self.deeper_channels)
        up = F.upsample(x_d, mode=self.upsample_mode.value)
        return self.fd(F.concat_channels([x_e, up]))

    def profile(self, input_shape: Shape, deeper_shape: Optional[Shape] = None,
                prefix: str = "") -> Tuple[Shape, List[MacRow]]:
        B, C, H, W = input_shape
        deeper_shape = deeper_shape or (B, self.deeper_channels, H // 2, W // 2)
        up_shape = (B, self.deeper_channels, H, W)
        fused = (B, C + self.deeper_channels, H, W)
        rows = [
            linear_row(f"{prefix}upsample", f"upsample_{self.upsample_mode.value}", deeper_shape, up_shape,
                       UPSAMPLE_MACS[self.upsample_mode.value]),
            move_row(f"{prefix}fuse", "concat", up_shape, fused),
        ]
        shape, fd_rows = self.fd.profile(fused, f"{prefix}fd.")
        return shape, rows + fd_rows


# ------------------------------------------------------------------------------
# Functional entry points
# ------------------------------------------------------------------------------
def cbam_forward(x: Tensor, cbam: Cbam) -> Tensor:
    return cbam(x)


def super_block_forward(x_e: Tensor, x_d: Tensor, block: SuperBlock) -> Tensor:
    return block(x_e, x_d)


def baseline_decoder_forward(x_e: Tensor, x_d: Tensor, stage: BaselineDecoderStage) -> Tensor:
    return stage(x_e, x_d)


def encoder_stage_forward(x: Tensor, stage: EncoderStage) -> Tuple[Tensor, Tensor]:
    return stage(x)
