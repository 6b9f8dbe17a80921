# superdec/services/training.py
"""
Training Loop

Mini-batch Adam over a SyntheticDataset. Each epoch visits the data in an
order drawn from default_rng([train.seed, epoch]), so two runs with the same
configuration produce the same parameters.

Per epoch the loop records the mean loss, the mean global gradient norm and,
for SUPER decoders, the realized suppression ratios on a fixed monitor batch.
Per-parameter gradient norms of the very first batch are kept as well; a
vanishing epoch gradient norm is logged as a warning.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from superdec.analysis.reconstruction import suppression_residual
from superdec.core.config import get_settings
from superdec.core.exceptions import NonFiniteError, TrainingDivergedError
from superdec.models.unet import UNet
from superdec.schemas.dataset import SyntheticDataset
from superdec.schemas.experiment import TrainConfig
from superdec.schemas.reports import EpochRecord, MetricsReport
from superdec.services.tasks import TaskStrategy
from superdec.tensor.optim import Adam
from superdec.tensor.tensor import Tensor, backward, no_grad, resolve_dtype

logger = logging.getLogger(__name__)

MONITOR_SIZE = 4


@dataclass
class TrainResult:
    model: UNet
    report: MetricsReport


def epoch_order(count: int, seed: int, epoch: int) -> np.ndarray:
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, epoch]).permutation(count)


def _first_non_finite(model: UNet) -> Optional[str]:
    for path, param in model.named_parameters():
        if param.grad is not None and not np.all(np.isfinite(param.grad)):
            return path
    return None


def locate_non_finite(model: UNet, x: Tensor) -> str:
    """Path of the first forward stage whose output is NaN or Inf, in execution order."""
    if not np.all(np.isfinite(x.data)):
        return "input"
    with no_grad():
        trace = model.forward_with_trace(x)
    L = len(trace.skips)
    stages = [(f"enc.stage{k}", trace.skips[k - 1]) for k in range(1, L + 1)]
    stages.append(("bottleneck", trace.bottom))
    stages += [(f"dec.stage{k}", trace.stage_outputs[k - 1]) for k in range(L, 0, -1)]
    stages.append(("head", trace.output))
    for name, out in stages:
        if not np.all(np.isfinite(out.data)):
            return name
    return "loss"


def _grad_norms(model: UNet) -> Dict[str, float]:
    return {
        path: float(np.linalg.norm(param.grad.astype(np.float64))) if param.grad is not None else 0.0
        for path, param in model.named_parameters()
    }


def identity_deviation(model: UNet, x: Tensor) -> Optional[float]:
    """Max |x_d^1 - x_e^1| of a SUPER decoder; zero for a freshly zero-initialized one."""
    if not model.is_super:
        return None
    with no_grad():
        trace = model.forward_with_trace(x)
    return float(np.max(np.abs(trace.stage_outputs[0].data.astype(np.float64)
                               - trace.skips[0].data.astype(np.float64))))


class Trainer:
    """
    Fits one model to one dataset under a TrainConfig.

    Attributes:
        task: strategy supplying the loss
        config: optimizer and loop settings
    """

    def __init__(self, task: TaskStrategy, config: TrainConfig):
        self.task = task
        self.config = config
        self.settings = get_settings()

    def _batch(self, dataset: SyntheticDataset, index: np.ndarray, dtype) -> tuple:
        return (Tensor(dataset.inputs[index].astype(dtype)),
                Tensor(dataset.targets[index].astype(dtype)))

    def _suppression(self, model: UNet, monitor: Tensor) -> Optional[list]:
        if not model.is_super:
            return None
        try:
            return suppression_residual(model, monitor).ratios
        except NonFiniteError as e:
            logger.warning(f"Suppression ratio skipped: {e}")
            return None

    def fit(self, model: UNet, dataset: SyntheticDataset, report: MetricsReport) -> TrainResult:
        """
        Train model in place and append per-epoch records to report.

        Raises:
            TrainingDivergedError: on the first non-finite loss or gradient,
                naming the epoch, the batch and the first offending parameter
        """
        cfg = self.config
        dtype = resolve_dtype(cfg.dtype)
        if model.dtype != dtype:
            model = model.astype(dtype)
        optimizer = Adam(model.parameters(), lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2, eps_opt=cfg.eps_opt)
        monitor = Tensor(dataset.inputs[:min(MONITOR_SIZE, len(dataset))].astype(dtype))
        report.pr_residual_at_init = identity_deviation(model, monitor)

        count = len(dataset)
        for epoch in range(1, cfg.epochs + 1):
            order = epoch_order(count, cfg.seed, epoch)
            loss_sum, norm_sum, batches = 0.0, 0.0, 0
            for batch, start in enumerate(range(0, count, cfg.batch_size), start=1):
                index = order[start:start + cfg.batch_size]
                x, target = self._batch(dataset, index, dtype)
                optimizer.zero_grad()
                loss = self.task.loss(model, x, target)
                value = loss.item()
                if not math.isfinite(value):
                    layer = locate_non_finite(model, x)
                    logger.error(f"Loss diverged at epoch {epoch}, batch {batch} in {layer}")
                    raise TrainingDivergedError(epoch, batch, layer, f"loss is {value}")
                backward(loss)
                bad = _first_non_finite(model)
                if bad is not None:
                    logger.error(f"Non-finite gradient at epoch {epoch}, batch {batch} in {bad}")
                    raise TrainingDivergedError(epoch, batch, bad, "gradient")
                norms = _grad_norms(model)
                if epoch == 1 and batch == 1:
                    report.first_batch_grad_norms = norms
                optimizer.step()
                loss_sum += value * len(index)
                norm_sum += math.sqrt(sum(n * n for n in norms.values()))
                batches += 1

            record = EpochRecord(epoch=epoch, loss=loss_sum / count, grad_norm=norm_sum / max(batches, 1))
            if epoch % cfg.eval_every == 0 or epoch == cfg.epochs:
                record.suppression_ratios = self._suppression(model, monitor)
            report.epochs.append(record)
            logger.info(f"epoch {epoch}/{cfg.epochs} loss {record.loss:.6f} grad_norm {record.grad_norm:.3e}")
            if record.grad_norm < self.settings.GRAD_VANISH_THRESHOLD:
                logger.warning(f"Vanishing gradients at epoch {epoch}: mean norm {record.grad_norm:.3e}")

        if report.epochs:
            report.final_loss = report.epochs[-1].loss
        report.suppression_ratios = self._suppression(model, monitor)
        return TrainResult(model=model, report=report)


def train(model: UNet, dataset: SyntheticDataset, config: TrainConfig, task: TaskStrategy,
          report: Optional[MetricsReport] = None) -> TrainResult:
    """Convenience wrapper around Trainer.fit with a fresh report when none is given."""
    if report is None:
        report = MetricsReport(task=task.get_name(), decoder_kind=model.spec.decoder_kind.value,
                               seed=config.seed, data_seed=dataset.spec.seed, dtype=config.dtype)
    return Trainer(task, config).fit(model, dataset, report)
