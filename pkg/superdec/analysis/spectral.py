# superdec/analysis/spectral.py
"""
Local Jacobian spectral norms.

Power iteration on J^T J: the Jacobian-vector product comes from a central
difference of the function, the vector-Jacobian product from one reverse
pass. Functions may take one Tensor or a list of Tensors; the list is
treated as one flat input vector.

Finite differences need f64 to resolve 1e-5 steps, so every estimate runs
on f64 copies of the linearization point whatever the dtype of x0. A
function closing over f32 parameters must be cast first (Module.astype),
as stage_bound_check does.
"""

import logging
from typing import Callable, List, NamedTuple, Optional, Sequence, Union

import numpy as np

from superdec.core.config import get_settings
from superdec.core.exceptions import ConfigError, DTypeError, NonFiniteError
from superdec.models.unet import UNet
from superdec.schemas.reports import NormEstimate, StageBoundResult
from superdec.tensor import functional as F
from superdec.tensor.tensor import Tensor, backward, no_grad

logger = logging.getLogger(__name__)

Inputs = Union[Tensor, Sequence[Tensor]]


class CompositionCheck(NamedTuple):
    sigma_f: float
    sigma_g: float
    sigma_fg: float
    holds: bool


class _FlatMap:
    """Adapts fn over one tensor or a list of tensors to flat numpy vectors."""

    def __init__(self, fn: Callable, x0: Inputs):
        self.fn = fn
        self.single = isinstance(x0, Tensor)
        self.points = [x0] if self.single else list(x0)
        self.shapes = [p.shape for p in self.points]
        self.sizes = [p.size for p in self.points]
        self.base = np.concatenate([p.data.reshape(-1).astype(np.float64) for p in self.points])

    @property
    def dim(self) -> int:
        return self.base.size

    def _split(self, flat: np.ndarray, requires_grad: bool = False) -> List[Tensor]:
        parts, offset = [], 0
        for shape, size in zip(self.shapes, self.sizes):
            chunk = flat[offset:offset + size].reshape(shape).astype(np.float64)
            parts.append(Tensor(chunk, requires_grad=requires_grad))
            offset += size
        return parts

    def _call(self, parts: List[Tensor]) -> Tensor:
        try:
            out = self.fn(parts[0] if self.single else parts)
        except DTypeError as exc:
            raise DTypeError(f"norm estimation evaluates fn in f64; cast its parameters with astype(\"f64\"): {exc}") from exc
        if not np.all(np.isfinite(out.data)):
            raise NonFiniteError("function produced a non-finite value during norm estimation")
        return out

    def value(self, flat: np.ndarray) -> np.ndarray:
        with no_grad():
            return self._call(self._split(flat)).data.astype(np.float64).reshape(-1)

    def jvp(self, v: np.ndarray, step: float) -> np.ndarray:
        return (self.value(self.base + step * v) - self.value(self.base - step * v)) / (2 * step)

    def vjp(self, u: np.ndarray) -> np.ndarray:
        parts = self._split(self.base, requires_grad=True)
        out = self._call(parts)
        if not out.requires_grad:
            return np.zeros(self.dim)
        weight = Tensor(u.reshape(out.shape).astype(out.dtype))
        backward(F.sum_all(F.mul(out, weight)))
        grads = [p.grad if p.grad is not None else np.zeros(p.shape) for p in parts]
        return np.concatenate([g.reshape(-1) for g in grads]).astype(np.float64)

    def output_dim(self) -> int:
        return self.value(self.base).size


def jacobian_spectral_norm(
    fn: Callable,
    x0: Inputs,
    max_iters: Optional[int] = None,
    tol: Optional[float] = None,
    seed: Optional[int] = None,
    step: Optional[float] = None,
    atol: float = 1e-8,
) -> NormEstimate:
    """
    Largest singular value of the Jacobian of fn at x0.

    Stops when the relative change of sigma drops below tol, or at once when
    sigma is below atol (a Jacobian that is zero up to rounding). An
    unconverged run still returns its last estimate with converged=False.
    """
    settings = get_settings()
    max_iters = settings.POWER_ITER_MAX_ITERS if max_iters is None else max_iters
    tol = settings.POWER_ITER_TOL if tol is None else tol
    seed = settings.POWER_ITER_SEED if seed is None else seed
    step = settings.JVP_STEP if step is None else step

    flat = _FlatMap(fn, x0)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(flat.dim)
    v /= np.linalg.norm(v)

    sigma, previous, change = 0.0, None, float("inf")
    for iteration in range(1, max_iters + 1):
        jv = flat.jvp(v, step)
        sigma = float(np.linalg.norm(jv))
        if sigma < atol:
            return NormEstimate(sigma=sigma, iterations=iteration, converged=True, residual=0.0)
        if previous is not None:
            change = abs(sigma - previous) / sigma
            if change < tol:
                return NormEstimate(sigma=sigma, iterations=iteration, converged=True, residual=change)
        previous = sigma
        w = flat.vjp(jv)
        w_norm = float(np.linalg.norm(w))
        if w_norm == 0.0:
            return NormEstimate(sigma=0.0, iterations=iteration, converged=True, residual=0.0)
        v = w / w_norm

    logger.warning(f"Power iteration did not converge in {max_iters} iterations (relative change {change:.3e})")
    return NormEstimate(sigma=sigma, iterations=max_iters, converged=False, residual=change)


def materialize_jacobian(fn: Callable, x0: Inputs) -> np.ndarray:
    """Explicit [outputs, inputs] Jacobian, one reverse pass per output coordinate."""
    flat = _FlatMap(fn, x0)
    m = flat.output_dim()
    rows = np.empty((m, flat.dim))
    for i in range(m):
        e = np.zeros(m)
        e[i] = 1.0
        rows[i] = flat.vjp(e)
    return rows


def dense_spectral_norm(matrix: np.ndarray) -> float:
    return float(np.linalg.svd(np.asarray(matrix, dtype=np.float64), compute_uv=False)[0])


def composition_check(f: Callable, g: Callable, x0: Inputs, rel_tol: float = 1e-4) -> CompositionCheck:
    """sigma(f o g) <= sigma(f) * sigma(g), with f linearized at g(x0)."""
    with no_grad():
        gx = g(x0)
    sigma_g = jacobian_spectral_norm(g, x0).sigma
    sigma_f = jacobian_spectral_norm(f, gx.detach()).sigma
    sigma_fg = jacobian_spectral_norm(lambda t: f(g(t)), x0).sigma
    return CompositionCheck(sigma_f, sigma_g, sigma_fg, sigma_fg <= sigma_f * sigma_g * (1 + rel_tol))


def _linearization_points(x: Tensor, samples: int, seed: int) -> List[Tensor]:
    points = [x]
    scale = float(np.std(x.data)) or 1.0
    for s in range(1, samples):
        noise = np.random.default_rng([seed, s]).standard_normal(x.shape)
        points.append(Tensor((x.data + 0.05 * scale * noise).astype(x.dtype)))
    return points


def stage_bound_check(
    model: UNet,
    x: Tensor,
    samples: Optional[int] = None,
    slack: Optional[float] = None,
) -> StageBoundResult:
    """
    Compare the decoder's local spectral norm against prod_k (1 + eps_k).

    For decoder stage k with output x_e - S_k(x_e, x_d):
        eps_k       sigma of dS_k over both stage inputs
        eps_skip_k  sigma of dS_k over x_e with x_d frozen
    sigma_total is taken over the whole decoder map (all skips and the
    bottleneck to x_d^1). Every figure is the max over linearization
    points; the first point is x itself.

    Raises:
        ConfigError: when the model does not use SUPER decoder stages
    """
    if not model.is_super:
        raise ConfigError("stage_bound_check needs decoder_kind=super", field_path="model.decoder_kind")
    settings = get_settings()
    samples = settings.NORM_SAMPLES if samples is None else samples
    slack = settings.BOUND_SLACK if slack is None else slack

    model64 = model.astype("f64")
    L = len(model64.dec)
    eps = [0.0] * L
    eps_skip = [0.0] * L
    sigma_total = 0.0
    unconverged = 0

    for point in _linearization_points(x.astype("f64").detach(), samples, settings.POWER_ITER_SEED):
        with no_grad():
            trace = model64.forward_with_trace(point)
        bottom = trace.bottom.detach()
        deeper = [t.detach() for t in trace.stage_outputs[1:]] + [bottom]
        skips = [t.detach() for t in trace.skips]

        for k in range(1, L + 1):
            stage = model64.dec[k]
            x_e, x_d = skips[k - 1], deeper[k - 1]

            def suppression(parts, stage=stage):
                return F.sub(parts[0], stage(parts[0], parts[1]))

            def suppression_skip(t, stage=stage, x_d=x_d):
                return F.sub(t, stage(t, x_d))

            joint = jacobian_spectral_norm(suppression, [x_e, x_d])
            skip_only = jacobian_spectral_norm(suppression_skip, x_e)
            unconverged += (not joint.converged) + (not skip_only.converged)
            eps[k - 1] = max(eps[k - 1], joint.sigma)
            eps_skip[k - 1] = max(eps_skip[k - 1], skip_only.sigma)

        total = jacobian_spectral_norm(lambda parts: model64.decode(parts[:L], parts[L]), skips + [bottom])
        unconverged += not total.converged
        sigma_total = max(sigma_total, total.sigma)

    bound = float(np.prod([1.0 + e for e in eps]))
    passed = sigma_total <= bound * (1.0 + slack)
    contraction = all(e < 1.0 for e in eps)
    logger.info(f"Stage bound: sigma_total={sigma_total:.6f}, bound={bound:.6f}, eps={[round(e, 6) for e in eps]}")
    if not contraction:
        logger.warning(f"Contraction premise fails: eps={eps}")
    if unconverged:
        logger.warning(f"{unconverged} power iterations did not converge during the stage bound check")
    return StageBoundResult(
        eps=eps, eps_skip=eps_skip, sigma_total=sigma_total, bound=bound, slack=slack,
        samples=samples, passed=passed, contraction_holds=contraction,
    )
