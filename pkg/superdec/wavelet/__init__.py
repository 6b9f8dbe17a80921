"""
Wavelet Package

Orthonormal Haar analysis (W) and synthesis (W^T) with exact perfect reconstruction.
"""

from superdec.wavelet.haar import (
    BAND_ORDER,
    SubbandEnergy,
    WaveletBands,
    dwt_haar,
    dwt_stacked,
    idwt_haar,
    idwt_stacked,
    stack_bands,
    subband_energy,
    unstack_bands,
)

__all__ = [
    "BAND_ORDER",
    "SubbandEnergy",
    "WaveletBands",
    "dwt_haar",
    "dwt_stacked",
    "idwt_haar",
    "idwt_stacked",
    "stack_bands",
    "subband_energy",
    "unstack_bands",
]
