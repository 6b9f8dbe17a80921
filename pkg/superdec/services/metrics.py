# superdec/services/metrics.py
"""
Evaluation Metrics

IoU is micro-aggregated: intersections and unions are summed over all images
of a bucket before dividing, and a bucket whose total union is empty scores
1.0. PSNR is computed per image on the [0,1] range, capped, then averaged.
"""

import logging
from typing import Callable, Optional

import numpy as np

from superdec.core.config import get_settings
from superdec.core.exceptions import ShapeError
from superdec.schemas.reports import SegmentationMetrics
from superdec.tensor.tensor import Tensor, no_grad, resolve_dtype

logger = logging.getLogger(__name__)

WIDTH_BUCKETS = {"0_2": (1, 2), "2_4": (3, 4)}


def predict_in_batches(fn: Callable[[Tensor], Tensor], inputs: np.ndarray, batch_size: int = 32,
                       dtype=None) -> np.ndarray:
    """Run fn over [N, ...] inputs in chunks without recording graphs."""
    target = resolve_dtype(dtype)
    outputs = []
    with no_grad():
        for start in range(0, inputs.shape[0], batch_size):
            batch = Tensor(inputs[start:start + batch_size].astype(target))
            outputs.append(fn(batch).data)
    return np.concatenate(outputs) if outputs else np.zeros((0,) + inputs.shape[1:], dtype=target)


def iou_from_masks(pred: np.ndarray, target: np.ndarray) -> float:
    """Intersection over union of two boolean masks; 1.0 when both are empty."""
    if pred.shape != target.shape:
        raise ShapeError("iou: mask shapes differ", dimension="shape", expected=target.shape, actual=pred.shape)
    pred, target = pred.astype(bool), target.astype(bool)
    union = np.logical_or(pred, target).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(pred, target).sum() / union)


def segmentation_metrics(logits: np.ndarray, targets: np.ndarray, widths: np.ndarray,
                         threshold: Optional[float] = None) -> SegmentationMetrics:
    """
    IoU of sigmoid(logits) > threshold against binary targets.

    Args:
        logits: [N, 1, S, S] raw model outputs
        targets: [N, 1, S, S] binary masks
        widths: [N] stroke width labels
        threshold: probability threshold, defaults to SEG_THRESHOLD

    Returns:
        SegmentationMetrics with overall and per-width-bucket IoU
    """
    threshold = get_settings().SEG_THRESHOLD if threshold is None else threshold
    # sigmoid(z) > p  <=>  z > logit(p)
    cut = np.log(threshold / (1.0 - threshold))
    pred = logits > cut
    gt = targets > 0.5
    buckets = {}
    counts = {}
    for name, (low, high) in WIDTH_BUCKETS.items():
        selected = (widths >= low) & (widths <= high)
        counts[name] = int(selected.sum())
        buckets[name] = iou_from_masks(pred[selected], gt[selected]) if counts[name] else None
    return SegmentationMetrics(
        iou_overall=iou_from_masks(pred, gt),
        iou_0_2=buckets["0_2"],
        iou_2_4=buckets["2_4"],
        count_0_2=counts["0_2"],
        count_2_4=counts["2_4"],
    )


def psnr(pred: np.ndarray, target: np.ndarray, cap: Optional[float] = None) -> float:
    """Peak signal-to-noise ratio in dB for one image on the [0,1] range."""
    cap = get_settings().PSNR_CAP_DB if cap is None else cap
    err = np.mean((pred.astype(np.float64) - target.astype(np.float64)) ** 2)
    if err == 0.0:
        return float(cap)
    return float(min(cap, -10.0 * np.log10(err)))


def mean_psnr(preds: np.ndarray, targets: np.ndarray, cap: Optional[float] = None) -> float:
    if preds.shape != targets.shape:
        raise ShapeError("psnr: shapes differ", dimension="shape", expected=targets.shape, actual=preds.shape)
    values = [psnr(p, t, cap) for p, t in zip(preds, targets)]
    return float(np.mean(values)) if values else float("nan")
