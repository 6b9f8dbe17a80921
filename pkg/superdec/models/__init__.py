# superdec/models/__init__.py
"""
Models Package

Neural building blocks and the toy U-Net they assemble into.
"""

from superdec.models.module import Module, StageList, parameter_rng
from superdec.models.layers import Conv2d, DoubleConv
from superdec.models.attention import Cbam
from superdec.models.blocks import (
    BaselineDecoderStage,
    EncoderStage,
    SuperBlock,
    baseline_decoder_forward,
    cbam_forward,
    encoder_stage_forward,
    super_block_forward,
)
from superdec.models.unet import ModelTrace, UNet, build_model

__all__ = [
    "Module",
    "StageList",
    "parameter_rng",
    "Conv2d",
    "DoubleConv",
    "Cbam",
    "BaselineDecoderStage",
    "EncoderStage",
    "SuperBlock",
    "baseline_decoder_forward",
    "cbam_forward",
    "encoder_stage_forward",
    "super_block_forward",
    "ModelTrace",
    "UNet",
    "build_model",
]
