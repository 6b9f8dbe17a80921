# superdec/services/losses.py
"""
Training losses, reduced to a [1,1,1,1] mean.
"""

import numpy as np

from superdec.core.exceptions import ShapeError
from superdec.tensor.functional import mean_all, mul, sub
from superdec.tensor.tensor import Function, Tensor


class BCEWithLogits(Function):
    """mean(max(z, 0) - z*t + log1p(exp(-|z|))), accumulated in f64."""

    def forward(self, logits, targets):
        z = logits.astype(np.float64)
        t = targets.astype(np.float64)
        self.z, self.t = z, t
        loss = np.maximum(z, 0.0) - z * t + np.log1p(np.exp(-np.abs(z)))
        return np.full((1, 1, 1, 1), loss.mean(), dtype=logits.dtype)

    def backward(self, grad):
        e = np.exp(-np.abs(self.z))
        prob = np.where(self.z >= 0, 1 / (1 + e), e / (1 + e))
        scale = float(grad.reshape(-1)[0]) / self.z.size
        return (prob - self.t) * scale, None


def _check_pair(pred: Tensor, target: Tensor, name: str) -> None:
    if pred.shape != target.shape:
        raise ShapeError(f"{name}: prediction {pred.shape} and target {target.shape} differ",
                         dimension="shape", expected=target.shape, actual=pred.shape)


def bce(logits: Tensor, targets: Tensor) -> Tensor:
    """Binary cross-entropy on raw logits against {0,1} targets."""
    _check_pair(logits, targets, "bce")
    return BCEWithLogits.apply(logits, targets)


def mse(pred: Tensor, target: Tensor) -> Tensor:
    _check_pair(pred, target, "mse")
    diff = sub(pred, target)
    return mean_all(mul(diff, diff))


LOSSES = {"bce": bce, "mse": mse}
