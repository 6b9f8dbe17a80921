# superdec/wavelet/haar.py
"""
Orthonormal single-level 2-D Haar filter bank.

For every non-overlapping 2x2 block [[a, b], [c, d]]:

    LL = (a + b + c + d) / 2        a = (LL + LH + HL + HH) / 2
    LH = (a - b + c - d) / 2        b = (LL - LH + HL - HH) / 2
    HL = (a + b - c - d) / 2        c = (LL + LH - HL - HH) / 2
    HH = (a - b - c + d) / 2        d = (LL - LH - HL + HH) / 2

LH is the horizontal high-pass (difference between columns), HL the
vertical one. The analysis matrix W is orthogonal, so W^T = W^-1: synthesis
is both the inverse and the adjoint of analysis, and each op's backward is
the other op.

Stacked layout is band-major: [LL_0..LL_{C-1}, LH_0.., HL_0.., HH_0..].
"""

from dataclasses import dataclass
from typing import NamedTuple, Tuple

import numpy as np

from superdec.core.exceptions import WaveletError
from superdec.tensor.functional import chunk_channels, concat_channels
from superdec.tensor.tensor import Function, Tensor

BAND_ORDER = ("ll", "lh", "hl", "hh")


def _analysis(x: np.ndarray) -> np.ndarray:
    a = x[:, :, 0::2, 0::2]
    b = x[:, :, 0::2, 1::2]
    c = x[:, :, 1::2, 0::2]
    d = x[:, :, 1::2, 1::2]
    half = np.asarray(0.5, dtype=x.dtype)
    ll = (a + b + c + d) * half
    lh = (a - b + c - d) * half
    hl = (a + b - c - d) * half
    hh = (a - b - c + d) * half
    return np.concatenate([ll, lh, hl, hh], axis=1)


def _synthesis(s: np.ndarray) -> np.ndarray:
    B, C4, h, w = s.shape
    C = C4 // 4
    ll, lh, hl, hh = (s[:, i * C:(i + 1) * C] for i in range(4))
    half = np.asarray(0.5, dtype=s.dtype)
    out = np.empty((B, C, 2 * h, 2 * w), dtype=s.dtype)
    out[:, :, 0::2, 0::2] = (ll + lh + hl + hh) * half
    out[:, :, 0::2, 1::2] = (ll - lh + hl - hh) * half
    out[:, :, 1::2, 0::2] = (ll + lh - hl - hh) * half
    out[:, :, 1::2, 1::2] = (ll - lh - hl + hh) * half
    return out


class HaarAnalysis(Function):
    def forward(self, x):
        return _analysis(x)

    def backward(self, grad):
        return (_synthesis(grad),)


class HaarSynthesis(Function):
    def forward(self, s):
        return _synthesis(s)

    def backward(self, grad):
        return (_analysis(grad),)


@dataclass
class WaveletBands:
    """The four Haar subbands of a [B,C,H,W] tensor, each [B,C,H/2,W/2]."""
    ll: Tensor
    lh: Tensor
    hl: Tensor
    hh: Tensor
    source_shape: Tuple[int, int, int, int]

    def as_tuple(self) -> Tuple[Tensor, Tensor, Tensor, Tensor]:
        return self.ll, self.lh, self.hl, self.hh


class SubbandEnergy(NamedTuple):
    """Fraction of squared l2 energy per band; sums to 1."""
    ll: float
    lh: float
    hl: float
    hh: float


def _check_even(x: Tensor) -> None:
    if x.ndim != 4:
        raise WaveletError(f"wavelet transform expects [B, C, H, W], got shape {x.shape}")
    _, _, H, W = x.shape
    if H < 2 or W < 2 or H % 2 or W % 2:
        raise WaveletError(f"odd spatial extent: H={H}, W={W} (both must be even and >= 2)")


def dwt_stacked(x: Tensor) -> Tensor:
    """Haar analysis of x [B,C,H,W] into the stacked [B,4C,H/2,W/2] layout."""
    _check_even(x)
    return HaarAnalysis.apply(x)


def idwt_stacked(s: Tensor) -> Tensor:
    """Haar synthesis of a stacked [B,4C,H/2,W/2] tensor back to [B,C,H,W]."""
    if s.ndim != 4 or s.shape[1] % 4:
        raise WaveletError(f"stacked bands need a channel count divisible by 4, got shape {s.shape}")
    return HaarSynthesis.apply(s)


def stack_bands(bands: WaveletBands) -> Tensor:
    """Stack bands in band-major channel order [LL, LH, HL, HH]."""
    shapes = {t.shape for t in bands.as_tuple()}
    if len(shapes) != 1:
        raise WaveletError(f"inconsistent band shapes: {sorted(shapes)}")
    return concat_channels(list(bands.as_tuple()))


def unstack_bands(x: Tensor) -> WaveletBands:
    """Inverse of stack_bands."""
    if x.ndim != 4 or x.shape[1] % 4:
        raise WaveletError(f"cannot unstack bands: channel count of {x.shape} is not divisible by 4")
    B, C4, h, w = x.shape
    ll, lh, hl, hh = chunk_channels(x, 4)
    return WaveletBands(ll=ll, lh=lh, hl=hl, hh=hh, source_shape=(B, C4 // 4, 2 * h, 2 * w))


def dwt_haar(x: Tensor) -> WaveletBands:
    """
    Single-level orthonormal Haar decomposition.

    Raises:
        WaveletError: "odd spatial extent" when H or W is odd; inputs are
            never padded, since padding would break exact reconstruction
    """
    return unstack_bands(dwt_stacked(x))


def idwt_haar(bands: WaveletBands) -> Tensor:
    """Exact inverse of dwt_haar."""
    return idwt_stacked(stack_bands(bands))


def subband_energy(bands: WaveletBands) -> SubbandEnergy:
    """
    Share of total squared energy carried by each band.

    Raises:
        WaveletError: "zero energy" when every band is identically zero
    """
    energies = [float(np.sum(np.square(t.data, dtype=np.float64))) for t in bands.as_tuple()]
    total = sum(energies)
    if total <= 0.0:
        raise WaveletError("zero energy: all bands are zero")
    return SubbandEnergy(*(e / total for e in energies))
