# superdec/schemas/reports.py
"""
Report Schemas

Results emitted by the analysis toolkit and the harness. All of them
serialize to JSON through pydantic; tabular ones also expose CSV rows.
"""

from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class NormEstimate(BaseModel):
    """Largest singular value of a local Jacobian, from power iteration."""
    sigma: float = Field(..., ge=0.0)
    iterations: int = Field(..., ge=0)
    converged: bool
    residual: float = Field(..., description="Relative change of sigma at the last iteration")


class MacRow(BaseModel):
    """One profiled layer."""
    name: str
    op: str
    input_shape: Tuple[int, ...]
    output_shape: Tuple[int, ...]
    macs: int = Field(..., ge=0)
    params: int = Field(0, ge=0)

    @property
    def input_volume(self) -> int:
        return _volume(self.input_shape)

    @property
    def element_volume(self) -> int:
        return _volume(self.output_shape)


def _volume(shape: Tuple[int, ...]) -> int:
    total = 1
    for extent in shape:
        total *= int(extent)
    return total


CSV_HEADER = ["name", "op", "input_shape", "output_shape", "input_volume", "element_volume", "macs", "params"]


class MacReport(BaseModel):
    """Per-layer MAC and parameter counts with exact integer totals."""
    rows: List[MacRow]
    total_macs: int
    total_params: int

    @model_validator(mode="after")
    def validate_totals(self) -> "MacReport":
        if self.total_macs != sum(r.macs for r in self.rows):
            raise ValueError("total_macs must equal the sum of rows")
        if self.total_params != sum(r.params for r in self.rows):
            raise ValueError("total_params must equal the sum of rows")
        return self

    @classmethod
    def from_rows(cls, rows: List[MacRow]) -> "MacReport":
        return cls(rows=rows, total_macs=sum(r.macs for r in rows), total_params=sum(r.params for r in rows))

    def csv_rows(self) -> List[List[str]]:
        out = [CSV_HEADER]
        for r in self.rows:
            out.append([
                r.name, r.op, "x".join(map(str, r.input_shape)), "x".join(map(str, r.output_shape)),
                str(r.input_volume), str(r.element_volume), str(r.macs), str(r.params),
            ])
        out.append(["TOTAL", "", "", "", "", "", str(self.total_macs), str(self.total_params)])
        return out


class PRResult(BaseModel):
    """Perfect-reconstruction residual of idwt(dwt(x))."""
    max_abs_residual: float
    tol: float
    passed: bool


class StageBoundResult(BaseModel):
    """Stage-wise suppression norms against the product bound on the full decoder."""
    eps: List[float] = Field(..., description="sigma of dS_k w.r.t. both stage inputs, max over samples")
    eps_skip: List[float] = Field(..., description="sigma of dS_k w.r.t. the skip only, deeper input frozen")
    sigma_total: float
    bound: float
    slack: float
    samples: int
    passed: bool
    contraction_holds: bool = Field(..., description="every eps_k < 1")


class SuppressionReport(BaseModel):
    """Realized ||x_out - x_skip|| / ||x_skip|| per decoder stage, stage 1 first."""
    ratios: List[float]


class SegmentationMetrics(BaseModel):
    """Micro-aggregated IoU, overall and per width bucket (None when a bucket is empty)."""
    iou_overall: float
    iou_0_2: Optional[float] = None
    iou_2_4: Optional[float] = None
    count_0_2: int = 0
    count_2_4: int = 0

    def bucket_items(self) -> List[Tuple[str, Optional[float]]]:
        return [("overall", self.iou_overall), ("0-2", self.iou_0_2), ("2-4", self.iou_2_4)]


class EpochRecord(BaseModel):
    epoch: int
    loss: float
    grad_norm: float
    suppression_ratios: Optional[List[float]] = None


class MetricsReport(BaseModel):
    """Everything one training run produces, minus wall-clock (kept in timing.json)."""
    task: str
    decoder_kind: str
    seed: int
    data_seed: int
    dtype: str
    epochs: List[EpochRecord] = Field(default_factory=list)
    final_loss: Optional[float] = None
    segmentation: Optional[SegmentationMetrics] = None
    psnr: Optional[float] = None
    input_psnr: Optional[float] = None
    pr_residual_at_init: Optional[float] = None
    suppression_ratios: Optional[List[float]] = None
    first_batch_grad_norms: Dict[str, float] = Field(default_factory=dict)
    total_macs: int = 0
    total_params: int = 0
    notes: List[str] = Field(default_factory=list)

    model_config = ConfigDict(protected_namespaces=())


class SuiteResult(BaseModel):
    name: str
    passed: bool
    detail: Dict[str, object] = Field(default_factory=dict)


class VerificationReport(BaseModel):
    suites: List[SuiteResult]

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)


class ComparisonRow(BaseModel):
    seed: int
    decoder: str
    bucket: Optional[str] = None
    value: Optional[float] = None


class ComparisonSummary(BaseModel):
    """
    Paired super-vs-baseline verdict for one task.

    accepted is non_inferior, and for denoising also denoise_gain_met: both
    arms beat the noisy input by DENOISE_GAIN_DB.
    """
    task: str
    seeds: List[int]
    metric: str
    super_mean: Optional[float]
    baseline_mean: Optional[float]
    paired_mean_difference: Optional[float]
    margin: float
    non_inferior: bool
    input_psnr: Optional[float] = None
    denoise_gain_met: Optional[bool] = None
    accepted: bool = False
    notes: List[str] = Field(default_factory=list)
