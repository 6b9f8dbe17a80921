# superdec/schemas/__init__.py
"""
Schemas Package

Pydantic models for specs, experiment configs and reports.
"""

from superdec.schemas.model_spec import (
    CbamSpec,
    DecoderKind,
    DoubleConvSpec,
    FdInit,
    FusionMode,
    ModelSpec,
    SuperBlockConfig,
    UpsampleMode,
)
from superdec.schemas.experiment import (
    DatasetSpec,
    ExperimentConfig,
    LossKind,
    Task,
    TASK_LOSS,
    TrainConfig,
)
from superdec.schemas.dataset import SyntheticDataset
from superdec.schemas.reports import (
    ComparisonRow,
    ComparisonSummary,
    EpochRecord,
    MacReport,
    MacRow,
    MetricsReport,
    NormEstimate,
    PRResult,
    SegmentationMetrics,
    StageBoundResult,
    SuiteResult,
    SuppressionReport,
    VerificationReport,
)

__all__ = [
    "CbamSpec",
    "DecoderKind",
    "DoubleConvSpec",
    "FdInit",
    "FusionMode",
    "ModelSpec",
    "SuperBlockConfig",
    "UpsampleMode",
    "DatasetSpec",
    "ExperimentConfig",
    "LossKind",
    "Task",
    "TASK_LOSS",
    "TrainConfig",
    "SyntheticDataset",
    "ComparisonRow",
    "ComparisonSummary",
    "EpochRecord",
    "MacReport",
    "MacRow",
    "MetricsReport",
    "NormEstimate",
    "PRResult",
    "SegmentationMetrics",
    "StageBoundResult",
    "SuiteResult",
    "SuppressionReport",
    "VerificationReport",
]
