"""
Analysis Package

Reconstruction residuals, local spectral norms, the stage-wise norm bound,
MAC accounting and the verification suites.
"""

from superdec.analysis.macs import MacRegimes, count_macs, mac_regimes
from superdec.analysis.reconstruction import suppression_residual, verify_pr
from superdec.analysis.spectral import (
    CompositionCheck,
    composition_check,
    dense_spectral_norm,
    jacobian_spectral_norm,
    materialize_jacobian,
    stage_bound_check,
)
from superdec.analysis.verification import run_verification_suites

__all__ = [
    "MacRegimes",
    "count_macs",
    "mac_regimes",
    "suppression_residual",
    "verify_pr",
    "CompositionCheck",
    "composition_check",
    "dense_spectral_norm",
    "jacobian_spectral_norm",
    "materialize_jacobian",
    "stage_bound_check",
    "run_verification_suites",
]
