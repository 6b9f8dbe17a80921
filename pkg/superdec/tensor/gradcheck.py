# superdec/tensor/gradcheck.py
"""
Finite-difference gradient checking.

Central differences (f(x + h e) - f(x - h e)) / (2h) are taken coordinate
by coordinate and compared to the reverse-mode gradient coordinate by
coordinate: the reported error is the worst |a - n| / max(|a|, |n|, 1e-8).
A wrong gradient on a tiny coordinate therefore fails as loudly as one on a
large coordinate. Check points should sit away from kinks (ReLU at 0, ties
in max pools) where central differences straddle two pieces.

The divisor of each difference is the perturbation actually representable
in the tensor's dtype, which keeps f32 checks honest when x + h rounds.
"""

import logging
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from superdec.core.exceptions import GraphError, NonFiniteError
from superdec.tensor.tensor import Parameter, Tensor, backward, no_grad

logger = logging.getLogger(__name__)

RELATIVE_FLOOR = 1e-8


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    analytic = np.asarray(analytic, dtype=np.float64).reshape(-1)
    numeric = np.asarray(numeric, dtype=np.float64).reshape(-1)
    if analytic.size == 0:
        return 0.0
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), RELATIVE_FLOOR)
    return float(np.max(np.abs(analytic - numeric) / scale))


def _scalar(out: Tensor) -> float:
    if out.size != 1:
        raise GraphError(f"gradient check needs a scalar function, got shape {out.shape}")
    value = float(out.data.reshape(-1)[0])
    if not np.isfinite(value):
        raise NonFiniteError(f"function under check returned {value}")
    return value


def _central_difference(evaluate: Callable[[], float], data: np.ndarray, index: tuple, step: float) -> float:
    original = data[index].copy()
    data[index] = original + step
    plus_at = float(data[index])
    f_plus = evaluate()
    data[index] = original - step
    minus_at = float(data[index])
    f_minus = evaluate()
    data[index] = original
    return (f_plus - f_minus) / (plus_at - minus_at)


def grad_check(fn: Callable[[Tensor], Tensor], x: Tensor, step: float = 1e-5) -> float:
    """
    Relative error between the analytic gradient of fn at x and central differences.

    Args:
        fn: deterministic map from a tensor to a single-element tensor
        x: linearization point (not modified)
        step: finite-difference step, must be positive

    Raises:
        NonFiniteError: if fn produces NaN or Inf
    """
    if step <= 0:
        raise ValueError("step must be positive")
    leaf = Tensor(x.data.copy(), requires_grad=True)
    out = fn(leaf)
    _scalar(out)
    if out.requires_grad:
        backward(out)
    analytic = leaf.grad if leaf.grad is not None else np.zeros_like(leaf.data)

    work = Tensor(x.data.copy())

    def evaluate() -> float:
        with no_grad():
            return _scalar(fn(work))

    numeric = np.zeros(work.shape)
    for index in np.ndindex(*work.shape):
        numeric[index] = _central_difference(evaluate, work.data, index, step)
    error = relative_error(analytic, numeric)
    logger.debug(f"grad_check over {work.size} coordinates: relative error {error:.3e}")
    return error


def grad_check_parameters(
    loss_fn: Callable[[], Tensor],
    params: Sequence[Parameter],
    step: float = 1e-5,
    max_coords_per_param: Optional[int] = None,
    seed: int = 0,
) -> dict:
    """
    Check dloss/dparam for every parameter of a model.

    loss_fn rebuilds the forward pass from the current parameter values.
    With max_coords_per_param set, a fixed-seed sample of coordinates is
    checked per parameter instead of all of them.

    Returns:
        {parameter name: relative error over the checked coordinates}
    """
    for p in params:
        p.zero_grad()
    out = loss_fn()
    _scalar(out)
    backward(out)
    analytic = {id(p): (p.grad.copy() if p.grad is not None else np.zeros_like(p.data)) for p in params}

    def evaluate() -> float:
        with no_grad():
            return _scalar(loss_fn())

    rng = np.random.default_rng(seed)
    report = {}
    for p in params:
        indices: Iterable[tuple] = list(np.ndindex(*p.shape))
        if max_coords_per_param is not None and len(indices) > max_coords_per_param:
            picks = rng.choice(len(indices), size=max_coords_per_param, replace=False)
            indices = [indices[i] for i in sorted(picks)]
        numeric = [_central_difference(evaluate, p.data, index, step) for index in indices]
        expected = [float(analytic[id(p)][index]) for index in indices]
        report[p.name] = relative_error(np.array(expected), np.array(numeric))
        p.zero_grad()
    return report
