# superdec/schemas/experiment.py
"""
Experiment Configuration Schemas

DatasetSpec, TrainConfig and the JSON experiment file that bundles them
with a ModelSpec. Defaults are the desk-scale protocol: 500 train / 100 test
images at 64x64, L=2, stem 8, Adam at 1e-3, 30 epochs.
"""

from enum import Enum
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from superdec.schemas.model_spec import ModelSpec


class Task(str, Enum):
    THIN_LINES = "thin_lines"
    DENOISE = "denoise"


class LossKind(str, Enum):
    BCE = "bce"
    MSE = "mse"


TASK_LOSS = {Task.THIN_LINES: LossKind.BCE, Task.DENOISE: LossKind.MSE}


class DatasetSpec(BaseModel):
    """Synthetic dataset parameters; the (spec, seed, index) triple fixes every sample."""
    task: Task = Task.THIN_LINES
    count: int = Field(500, ge=1)
    size: int = Field(64, ge=2, description="Square image side, a power of two")
    min_width: int = Field(1, ge=1, le=4)
    max_width: int = Field(4, ge=1, le=4)
    min_lines: int = Field(1, ge=1)
    max_lines: int = Field(3, ge=1)
    texture_amplitude: float = Field(0.1, ge=0.0, le=0.5, description="Bound on background sinusoid amplitude")
    noise_sigma: float = Field(0.1, ge=0.0, le=1.0, description="Gaussian noise sigma on the [0,1] range")
    seed: int = 0

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_ranges(self) -> "DatasetSpec":
        if self.size & (self.size - 1):
            raise ValueError(f"size must be a power of two, got {self.size}")
        if self.min_width > self.max_width:
            raise ValueError("min_width must not exceed max_width")
        if self.min_lines > self.max_lines:
            raise ValueError("min_lines must not exceed max_lines")
        return self


class TrainConfig(BaseModel):
    """Optimizer and loop settings."""
    epochs: int = Field(30, ge=0)
    batch_size: int = Field(16, ge=1)
    lr: float = Field(1e-3, ge=0.0)
    beta1: float = Field(0.9, ge=0.0, lt=1.0)
    beta2: float = Field(0.999, ge=0.0, lt=1.0)
    eps_opt: float = Field(1e-8, gt=0.0)
    seed: int = 0
    loss: Optional[LossKind] = Field(None, description="Defaults to bce for thin_lines, mse for denoise")
    eval_every: int = Field(1, ge=1, description="Epochs between suppression-ratio checks")
    dtype: Literal["f32", "f64"] = "f32"

    model_config = ConfigDict(frozen=True)


class ExperimentConfig(BaseModel):
    """One experiment file: model, training data, training loop, test split size."""
    model: ModelSpec = Field(default_factory=ModelSpec)
    dataset: DatasetSpec = Field(default_factory=DatasetSpec)
    train: TrainConfig = Field(default_factory=TrainConfig)
    test_count: int = Field(100, ge=1)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_experiment(self) -> "ExperimentConfig":
        expected = TASK_LOSS[self.dataset.task]
        if self.train.loss is not None and self.train.loss != expected:
            raise ValueError(f"loss for task {self.dataset.task.value} must be {expected.value}")
        if self.dataset.size % self.model.size_multiple:
            raise ValueError(
                f"dataset size {self.dataset.size} is not divisible by 2^depth = {self.model.size_multiple}"
            )
        if self.dataset.count < self.train.batch_size:
            raise ValueError("dataset count must be at least batch_size")
        return self

    @property
    def loss(self) -> LossKind:
        return self.train.loss or TASK_LOSS[self.dataset.task]

    @property
    def test_dataset(self) -> DatasetSpec:
        """Held-out split: same generator, disjoint seed stream."""
        return self.dataset.model_copy(update={"count": self.test_count, "seed": self.dataset.seed + 1_000_003})

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return self.model_copy(update={"train": self.train.model_copy(update={"seed": seed})})
