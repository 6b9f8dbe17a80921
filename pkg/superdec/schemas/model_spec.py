# superdec/schemas/model_spec.py
"""
Model Specification Schemas

Declarative descriptions of the neural building blocks and of the toy U-Net
they are assembled into. Validation lives here so every builder can assume
channel arithmetic is already consistent.
"""

from enum import Enum
from typing import List

from pydantic import BaseModel, ConfigDict, Field, model_validator


class DecoderKind(str, Enum):
    """Decoder stage family."""
    SUPER = "super"
    BASELINE = "baseline"


class FusionMode(str, Enum):
    """How the deeper decoder feature joins the skip's wavelet bands."""
    SUM_LL = "sum_ll"
    CONCAT = "concat"


class FdInit(str, Enum):
    """Initialization of the final convolution of each SUPER stage's F_d."""
    ZERO = "zero"
    RANDOM = "random"


class UpsampleMode(str, Enum):
    NEAREST = "nearest"
    BILINEAR = "bilinear"


class CbamSpec(BaseModel):
    """Channel-then-spatial attention gate."""
    channels: int = Field(..., ge=1, description="Channels gated by the module")
    reduction: int = Field(4, ge=1, description="MLP reduction ratio")
    spatial_kernel: int = Field(7, ge=1, description="Odd kernel of the spatial attention conv")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_kernel(self) -> "CbamSpec":
        if self.spatial_kernel % 2 == 0:
            raise ValueError("spatial_kernel must be odd")
        return self

    @property
    def hidden_channels(self) -> int:
        # reduced width is clamped so narrow gates still have one hidden unit
        return max(1, self.channels // self.reduction)


class DoubleConvSpec(BaseModel):
    """Two 3x3 convolutions (pad 1), hidden width = out_channels."""
    in_channels: int = Field(..., ge=1)
    out_channels: int = Field(..., ge=1)
    final_relu: bool = Field(True, description="ReLU after the second convolution")
    zero_init_final: bool = Field(False, description="Zero-initialize the second convolution")

    model_config = ConfigDict(frozen=True)


class SuperBlockConfig(BaseModel):
    """One SUPER decoder stage: skip C^k, deeper C^{k+1}, F_d mapping fused channels to 4C^k."""
    skip_channels: int = Field(..., ge=1, description="C^k")
    deeper_channels: int = Field(..., ge=1, description="C^{k+1}")
    fusion: FusionMode = FusionMode.SUM_LL
    fd_spec: DoubleConvSpec
    use_cbam: bool = True
    use_suppression: bool = Field(True, description="Subtract the residual from the bands before synthesis")
    cbam_reduction: int = Field(4, ge=1)
    cbam_kernel: int = Field(7, ge=1)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_channels(self) -> "SuperBlockConfig":
        if self.fd_spec.out_channels != 4 * self.skip_channels:
            raise ValueError(
                f"fd_spec.out_channels must equal 4 * skip_channels = {4 * self.skip_channels}, "
                f"got {self.fd_spec.out_channels}"
            )
        if self.fd_spec.in_channels != self.fused_channels:
            raise ValueError(
                f"fd_spec.in_channels must equal the fused width {self.fused_channels} "
                f"for fusion={self.fusion.value}, got {self.fd_spec.in_channels}"
            )
        return self

    @property
    def fused_channels(self) -> int:
        if self.fusion == FusionMode.SUM_LL:
            return 4 * self.skip_channels
        return 4 * self.skip_channels + self.deeper_channels

    @classmethod
    def build(
        cls,
        skip_channels: int,
        deeper_channels: int,
        fusion: FusionMode = FusionMode.SUM_LL,
        use_cbam: bool = True,
        use_suppression: bool = True,
        zero_init_final: bool = True,
        cbam_reduction: int = 4,
        cbam_kernel: int = 7,
    ) -> "SuperBlockConfig":
        """Derive a consistent F_d spec from the stage widths."""
        fusion = FusionMode(fusion)
        fused = 4 * skip_channels if fusion == FusionMode.SUM_LL else 4 * skip_channels + deeper_channels
        return cls(
            skip_channels=skip_channels,
            deeper_channels=deeper_channels,
            fusion=fusion,
            fd_spec=DoubleConvSpec(
                in_channels=fused,
                out_channels=4 * skip_channels,
                final_relu=False,
                zero_init_final=zero_init_final,
            ),
            use_cbam=use_cbam,
            use_suppression=use_suppression,
            cbam_reduction=cbam_reduction,
            cbam_kernel=cbam_kernel,
        )


class ModelSpec(BaseModel):
    """Toy U-Net: L encoder stages with doubling widths, bottleneck, L decoder stages, 1x1 head."""
    depth: int = Field(2, ge=1, le=6, description="Number of encoder/decoder stages L")
    in_channels: int = Field(1, ge=1)
    stem_channels: int = Field(8, ge=1, description="Width of encoder stage 1")
    decoder_kind: DecoderKind = DecoderKind.SUPER
    fusion: FusionMode = FusionMode.SUM_LL
    use_cbam: bool = True
    use_suppression: bool = True
    fd_init: FdInit = FdInit.ZERO
    fd_init_gain: float = Field(1.0, ge=0.0, description="He-uniform gain for fd_init=random")
    cbam_reduction: int = Field(4, ge=1)
    cbam_kernel: int = Field(7, ge=1)
    upsample_mode: UpsampleMode = UpsampleMode.BILINEAR

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_kernel(self) -> "ModelSpec":
        if self.cbam_kernel % 2 == 0:
            raise ValueError("cbam_kernel must be odd")
        return self

    @property
    def widths(self) -> List[int]:
        """Channel widths c_1..c_{L+1}; the last one is the bottleneck."""
        return [self.stem_channels * 2 ** k for k in range(self.depth + 1)]

    @property
    def size_multiple(self) -> int:
        return 2 ** self.depth

    def stage_config(self, k: int) -> SuperBlockConfig:
        """SuperBlockConfig of decoder stage k (1-based, 1 = full resolution)."""
        widths = self.widths
        return SuperBlockConfig.build(
            skip_channels=widths[k - 1],
            deeper_channels=widths[k],
            fusion=self.fusion,
            use_cbam=self.use_cbam,
            use_suppression=self.use_suppression,
            zero_init_final=self.fd_init == FdInit.ZERO,
            cbam_reduction=self.cbam_reduction,
            cbam_kernel=self.cbam_kernel,
        )
