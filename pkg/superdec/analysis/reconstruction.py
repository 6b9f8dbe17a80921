# superdec/analysis/reconstruction.py
"""
Reconstruction diagnostics: the Haar round-trip residual and the realized
per-stage suppression ratio of a decoder.
"""

import logging
from typing import List

import numpy as np

from superdec.core.exceptions import NonFiniteError
from superdec.models.unet import UNet
from superdec.schemas.reports import PRResult, SuppressionReport
from superdec.tensor.tensor import Tensor, no_grad
from superdec.wavelet.haar import dwt_stacked, idwt_stacked

logger = logging.getLogger(__name__)


def verify_pr(x: Tensor, tol: float) -> PRResult:
    """
    Max-abs residual of idwt(dwt(x)) against x.

    Raises:
        WaveletError: when H or W is odd
    """
    with no_grad():
        recon = idwt_stacked(dwt_stacked(x))
    residual = float(np.max(np.abs(recon.data.astype(np.float64) - x.data.astype(np.float64))))
    return PRResult(max_abs_residual=residual, tol=tol, passed=residual <= tol)


def suppression_residual(model: UNet, x: Tensor) -> SuppressionReport:
    """
    ||x_out - x_skip|| / ||x_skip|| for every decoder stage, stage 1 first.

    Raises:
        NonFiniteError: when a skip feature is identically zero
    """
    with no_grad():
        trace = model.forward_with_trace(x)
    ratios: List[float] = []
    for k, (skip, out) in enumerate(zip(trace.skips, trace.stage_outputs), start=1):
        skip_norm = float(np.linalg.norm(skip.data.astype(np.float64)))
        if skip_norm == 0.0:
            raise NonFiniteError(f"zero-norm skip at decoder stage {k}; suppression ratio undefined")
        diff = out.data.astype(np.float64) - skip.data.astype(np.float64)
        ratios.append(float(np.linalg.norm(diff)) / skip_norm)
    return SuppressionReport(ratios=ratios)
