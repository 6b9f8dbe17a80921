"""
Unit tests for the Adam update rule.
"""

import numpy as np
import pytest

from superdec.core.exceptions import ShapeError
from superdec.tensor.optim import Adam, AdamState, adam_step
from superdec.tensor.tensor import Parameter


pytestmark = pytest.mark.fast


def test_zero_gradient_leaves_params_unchanged():
    params = [np.array([1.0, -2.0, 3.0])]
    state = AdamState.zeros_like(params)
    new_params, new_state = adam_step(params, [np.zeros(3)], state)
    np.testing.assert_array_equal(new_params[0], params[0])
    assert new_state.step == 1


def test_first_step_is_lr_times_sign():
    """After bias correction the first step is -lr * g / (|g| + eps)."""
    params = [np.zeros(3)]
    grads = [np.array([0.5, -4.0, 1e-3])]
    new_params, _ = adam_step(params, grads, AdamState.zeros_like(params), lr=0.1, eps_opt=1e-8)
    expected = -0.1 * grads[0] / (np.abs(grads[0]) + 1e-8)
    np.testing.assert_allclose(new_params[0], expected, rtol=1e-9)


def test_constant_gradient_step_approaches_lr():
    params = [np.zeros(1)]
    state = AdamState.zeros_like(params)
    previous = params[0].copy()
    for _ in range(200):
        params, state = adam_step(params, [np.array([0.3])], state, lr=0.01)
        delta = float(previous[0] - params[0][0])
        previous = params[0].copy()
    assert delta == pytest.approx(0.01, rel=1e-6)


def test_inputs_are_not_modified():
    params = [np.ones(2)]
    state = AdamState.zeros_like(params)
    adam_step(params, [np.ones(2)], state)
    np.testing.assert_array_equal(params[0], np.ones(2))
    assert state.step == 0


def test_shape_mismatch():
    params = [np.zeros((2, 2))]
    with pytest.raises(ShapeError):
        adam_step(params, [np.zeros(3)], AdamState.zeros_like(params))


def test_count_mismatch():
    params = [np.zeros(2), np.zeros(2)]
    with pytest.raises(ShapeError):
        adam_step(params, [np.zeros(2)], AdamState.zeros_like(params))


def test_negative_step_counter():
    params = [np.zeros(2)]
    state = AdamState(step=-1, m=[np.zeros(2)], v=[np.zeros(2)])
    with pytest.raises(ValueError):
        adam_step(params, [np.zeros(2)], state)


def test_optimizer_keeps_dtype_and_treats_missing_grad_as_zero():
    p = Parameter(np.ones((1, 1, 2, 2)), name="w", dtype="f32")
    q = Parameter(np.ones((1, 1, 1, 1)), name="b", dtype="f32")
    p.grad = np.full((1, 1, 2, 2), 2.0, dtype=np.float32)
    optimizer = Adam([p, q], lr=0.5)
    optimizer.step()
    assert p.dtype == np.float32
    np.testing.assert_allclose(p.data, 0.5, rtol=1e-6)
    np.testing.assert_array_equal(q.data, np.ones((1, 1, 1, 1), dtype=np.float32))
    optimizer.zero_grad()
    assert p.grad is None
