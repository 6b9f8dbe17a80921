# superdec/services/__init__.py
"""
Services Package

The experiment harness: synthetic data, losses, metrics, task strategies,
the training loop and experiment orchestration.
"""

from superdec.services.datasets import build_dataset, gen_denoise, gen_thin_lines, render_stroke
from superdec.services.losses import bce, mse
from superdec.services.metrics import iou_from_masks, mean_psnr, psnr, segmentation_metrics
from superdec.services.tasks import (
    DenoiseTask,
    TaskFactory,
    TaskStrategy,
    ThinLinesTask,
    eval_denoise,
    eval_segmentation,
)
from superdec.services.training import Trainer, TrainResult, train
from superdec.services.experiment_service import ExperimentService, load_config, parse_config

__all__ = [
    "build_dataset",
    "gen_denoise",
    "gen_thin_lines",
    "render_stroke",
    "bce",
    "mse",
    "iou_from_masks",
    "mean_psnr",
    "psnr",
    "segmentation_metrics",
    "DenoiseTask",
    "TaskFactory",
    "TaskStrategy",
    "ThinLinesTask",
    "eval_denoise",
    "eval_segmentation",
    "Trainer",
    "TrainResult",
    "train",
    "ExperimentService",
    "load_config",
    "parse_config",
]
