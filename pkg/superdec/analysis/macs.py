# superdec/analysis/macs.py
"""
MAC and parameter accounting.

count_macs profiles an actual UNet built from the ModelSpec, so parameter
totals match build_model exactly. mac_regimes computes the two readings of
the wavelet cost claim at one (H, W, C): channel-linear ops cost the same at
(H, W, C) and (H/2, W/2, 4C); a dense 3x3 conv costs exactly 4x more.
"""

from typing import NamedTuple, Optional, Tuple

from superdec.models.profiling import WAVELET_MACS, channel_linear_macs, conv2d_macs, volume
from superdec.models.unet import UNet
from superdec.schemas.model_spec import ModelSpec
from superdec.schemas.reports import MacReport


class MacRegimes(NamedTuple):
    volume_in: int
    volume_bands: int
    linear_full: int
    linear_bands: int
    conv_full: int
    conv_bands: int

    @property
    def volume_conserved(self) -> bool:
        return self.volume_in == self.volume_bands

    @property
    def linear_equal(self) -> bool:
        return self.linear_full == self.linear_bands

    @property
    def conv_ratio(self) -> Tuple[int, int]:
        """(conv_bands // conv_full, conv_bands % conv_full)"""
        return divmod(self.conv_bands, self.conv_full)


def count_macs(spec: ModelSpec, input_shape: Optional[Tuple[int, int, int, int]] = None) -> MacReport:
    """Per-layer MAC rows and exact totals for spec at input_shape (default [1, Cin, 64, 64])."""
    if input_shape is None:
        input_shape = (1, spec.in_channels, 64, 64)
    model = UNet(spec)
    model.check_input_shape(tuple(input_shape))
    _, rows = model.profile(tuple(input_shape))
    return MacReport.from_rows(rows)


def mac_regimes(height: int, width: int, channels: int, batch: int = 1) -> MacRegimes:
    full = (batch, channels, height, width)
    bands = (batch, 4 * channels, height // 2, width // 2)
    return MacRegimes(
        volume_in=volume(full),
        volume_bands=volume(bands),
        linear_full=channel_linear_macs(full, WAVELET_MACS),
        linear_bands=channel_linear_macs(bands, WAVELET_MACS),
        conv_full=conv2d_macs(batch, height, width, channels, channels, 3, 3),
        conv_bands=conv2d_macs(batch, height // 2, width // 2, 4 * channels, 4 * channels, 3, 3),
    )
