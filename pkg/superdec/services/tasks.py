# superdec/services/tasks.py
"""
Task Strategies

Each task owns how its data is generated, how the model output becomes a
prediction, which loss trains it and how a trained model is scored.

- thin_lines: the model emits logits; BCE against the stroke mask; scored by
  micro IoU overall and per stroke-width bucket.
- denoise: residual head, prediction = noisy + model(noisy); MSE against the
  clean image; scored by mean PSNR against the clean image.
"""

import logging
from abc import ABC, abstractmethod
from typing import List, Optional

import numpy as np

from superdec.core.exceptions import ConfigError
from superdec.models.unet import UNet
from superdec.schemas.dataset import SyntheticDataset
from superdec.schemas.experiment import DatasetSpec, Task
from superdec.schemas.reports import MetricsReport, SegmentationMetrics
from superdec.services.datasets import build_dataset
from superdec.services.losses import bce, mse
from superdec.services.metrics import mean_psnr, predict_in_batches, segmentation_metrics
from superdec.tensor.functional import add
from superdec.tensor.tensor import Tensor

logger = logging.getLogger(__name__)


class TaskStrategy(ABC):
    """Interface shared by all training tasks."""

    @abstractmethod
    def get_name(self) -> str:
        pass

    def generate(self, spec: DatasetSpec, dtype=None) -> SyntheticDataset:
        if spec.task.value != self.get_name():
            raise ConfigError(f"dataset task {spec.task.value} does not match {self.get_name()}",
                              field_path="dataset.task")
        return build_dataset(spec, dtype=dtype)

    @abstractmethod
    def predict(self, model: UNet, x: Tensor) -> Tensor:
        """Model output in target space, graph recorded when enabled."""
        pass

    @abstractmethod
    def loss(self, model: UNet, x: Tensor, target: Tensor) -> Tensor:
        pass

    @abstractmethod
    def evaluate(self, model: UNet, dataset: SyntheticDataset, report: MetricsReport) -> MetricsReport:
        """Score a trained model on a held-out split and fill the task fields of report."""
        pass

    def predict_dataset(self, model: UNet, dataset: SyntheticDataset, batch_size: int = 32) -> np.ndarray:
        return predict_in_batches(lambda x: self.predict(model, x), dataset.inputs,
                                  batch_size=batch_size, dtype=model.dtype)


class ThinLinesTask(TaskStrategy):
    """Binary segmentation of thin strokes."""

    def get_name(self) -> str:
        return Task.THIN_LINES.value

    def predict(self, model: UNet, x: Tensor) -> Tensor:
        return model(x)

    def loss(self, model: UNet, x: Tensor, target: Tensor) -> Tensor:
        return bce(self.predict(model, x), target)

    def evaluate(self, model: UNet, dataset: SyntheticDataset, report: MetricsReport) -> MetricsReport:
        report.segmentation = eval_segmentation(model, dataset)
        seg = report.segmentation
        logger.info(f"IoU overall {seg.iou_overall:.4f}, 0-2px {seg.iou_0_2}, 2-4px {seg.iou_2_4}")
        return report


class DenoiseTask(TaskStrategy):
    """Gaussian denoising with a residual output head."""

    def get_name(self) -> str:
        return Task.DENOISE.value

    def predict(self, model: UNet, x: Tensor) -> Tensor:
        return add(x, model(x))

    def loss(self, model: UNet, x: Tensor, target: Tensor) -> Tensor:
        return mse(self.predict(model, x), target)

    def evaluate(self, model: UNet, dataset: SyntheticDataset, report: MetricsReport) -> MetricsReport:
        report.psnr = eval_denoise(model, dataset)
        report.input_psnr = mean_psnr(dataset.inputs, dataset.targets)
        logger.info(f"PSNR {report.psnr:.3f} dB (noisy input {report.input_psnr:.3f} dB)")
        return report


class TaskFactory:
    """Creates task strategies by name."""

    _strategies = {
        Task.THIN_LINES.value: ThinLinesTask,
        Task.DENOISE.value: DenoiseTask,
    }

    @classmethod
    def create(cls, task_name) -> TaskStrategy:
        """
        Create a task strategy by name.

        Args:
            task_name: Task name or Task member

        Returns:
            Strategy instance

        Raises:
            ConfigError: If the task name is unknown
        """
        name = task_name.value if isinstance(task_name, Task) else str(task_name)
        strategy_class = cls._strategies.get(name)
        if not strategy_class:
            raise ConfigError(f"Unknown task: {name}", field_path="dataset.task")
        return strategy_class()

    @classmethod
    def register_strategy(cls, name: str, strategy_class: type):
        cls._strategies[name] = strategy_class

    @classmethod
    def get_available_strategies(cls) -> List[str]:
        return list(cls._strategies.keys())


def eval_segmentation(model: UNet, dataset: SyntheticDataset,
                      threshold: Optional[float] = None) -> SegmentationMetrics:
    """IoU of sigmoid(model(x)) > threshold, overall and per width bucket."""
    if dataset.widths is None:
        raise ConfigError("thin_lines evaluation needs width labels", field_path="dataset.task")
    logits = ThinLinesTask().predict_dataset(model, dataset)
    return segmentation_metrics(logits, dataset.targets, dataset.widths, threshold)


def eval_denoise(model: UNet, dataset: SyntheticDataset) -> float:
    """Mean per-image PSNR of the residual-head prediction against the clean targets."""
    return mean_psnr(DenoiseTask().predict_dataset(model, dataset), dataset.targets)
