# superdec/tensor/optim.py
"""
Adam optimizer.

adam_step is the pure update rule; Adam binds it to a model's parameters and
keeps the moment state between steps.
"""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from superdec.core.exceptions import ShapeError
from superdec.tensor.tensor import Parameter


@dataclass
class AdamState:
    """First/second moment estimates and the number of completed steps."""
    step: int = 0
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)

    @classmethod
    def zeros_like(cls, params: Sequence[np.ndarray]) -> "AdamState":
        return cls(step=0, m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params])


def adam_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: AdamState,
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps_opt: float = 1e-8,
) -> Tuple[List[np.ndarray], AdamState]:
    """
    One bias-corrected Adam update.

    Returns new parameter arrays and a new state; inputs are not modified.

    Raises:
        ShapeError: if params, grads and moments do not line up
    """
    if state.step < 0:
        raise ValueError("Adam step counter must be >= 0")
    if not (len(params) == len(grads) == len(state.m) == len(state.v)):
        raise ShapeError("adam_step: params, grads and moments differ in count",
                         dimension="count", expected=len(params), actual=(len(grads), len(state.m), len(state.v)))
    t = state.step + 1
    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if not (p.shape == g.shape == m.shape == v.shape):
            raise ShapeError("adam_step: shape mismatch", dimension="param", expected=p.shape,
                             actual=(g.shape, m.shape, v.shape))
        m_t = beta1 * m + (1 - beta1) * g
        v_t = beta2 * v + (1 - beta2) * g * g
        m_hat = m_t / (1 - beta1 ** t)
        v_hat = v_t / (1 - beta2 ** t)
        update = lr * m_hat / (np.sqrt(v_hat) + eps_opt)
        new_params.append((p - update).astype(p.dtype, copy=False))
        new_m.append(m_t.astype(p.dtype, copy=False))
        new_v.append(v_t.astype(p.dtype, copy=False))
    return new_params, AdamState(step=t, m=new_m, v=new_v)


class Adam:
    """Adam over a fixed list of parameters; missing grads count as zero."""

    def __init__(self, params: Sequence[Parameter], lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps_opt: float = 1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps_opt = eps_opt
        self.state = AdamState.zeros_like([p.data for p in self.params])

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self) -> None:
        grads = [p.grad if p.grad is not None else np.zeros_like(p.data) for p in self.params]
        new_params, self.state = adam_step(
            [p.data for p in self.params], grads, self.state,
            lr=self.lr, beta1=self.beta1, beta2=self.beta2, eps_opt=self.eps_opt,
        )
        for p, value in zip(self.params, new_params):
            p.data = value
