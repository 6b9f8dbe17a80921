# superdec/schemas/dataset.py
"""
In-memory synthetic dataset.

Arrays are stacked along the batch axis so a mini-batch is a fancy-indexed
slice. widths is present for thin_lines only.
"""

from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from superdec.schemas.experiment import DatasetSpec


class SyntheticDataset(BaseModel):
    """inputs and targets are [N, 1, S, S]; widths is [N] (stroke width in px)."""
    spec: DatasetSpec
    inputs: np.ndarray
    targets: np.ndarray
    widths: Optional[np.ndarray] = None

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def validate_arrays(self) -> "SyntheticDataset":
        if self.inputs.shape != self.targets.shape:
            raise ValueError(f"inputs {self.inputs.shape} and targets {self.targets.shape} differ")
        if self.inputs.ndim != 4:
            raise ValueError("dataset arrays must be [N, 1, S, S]")
        if self.widths is not None and self.widths.shape != (self.inputs.shape[0],):
            raise ValueError("one width label per image")
        return self

    def __len__(self) -> int:
        return int(self.inputs.shape[0])

    def subset(self, index: np.ndarray) -> "SyntheticDataset":
        return SyntheticDataset(
            spec=self.spec,
            inputs=self.inputs[index],
            targets=self.targets[index],
            widths=None if self.widths is None else self.widths[index],
        )
