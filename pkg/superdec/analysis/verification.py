# superdec/analysis/verification.py
"""
Verification suites behind `superdec verify`.

    pr          Haar round trip and Parseval at f64 and f32
    gradients   every differentiable op, the SUPER block and a tiny full model
    identity    zero-initialized SUPER stages and models return their skips
    norms       power iteration against closed forms and a dense SVD oracle,
                composition inequality, stage bound on small-gain models
    macs        element-volume conservation and the two MAC regimes

quick=True shrinks sample counts so the whole run stays interactive.
"""

import logging
from typing import Callable, Dict, List

import numpy as np

from superdec.analysis.macs import count_macs, mac_regimes
from superdec.analysis.reconstruction import verify_pr
from superdec.analysis.spectral import (
    composition_check,
    dense_spectral_norm,
    jacobian_spectral_norm,
    materialize_jacobian,
    stage_bound_check,
)
from superdec.models.blocks import SuperBlock
from superdec.models.unet import build_model
from superdec.schemas.model_spec import FdInit, ModelSpec, SuperBlockConfig
from superdec.schemas.reports import SuiteResult, VerificationReport
from superdec.tensor import functional as F
from superdec.tensor.gradcheck import grad_check, grad_check_parameters
from superdec.tensor.tensor import Tensor, no_grad
from superdec.wavelet.haar import dwt_stacked, idwt_stacked

logger = logging.getLogger(__name__)

GRAD_TOL = 1e-5
NORM_TOL = 1e-6
ORACLE_TOL = 1e-4


def _tensor(rng: np.random.Generator, shape, dtype: str = "f64") -> Tensor:
    return Tensor(rng.standard_normal(shape), dtype=dtype)


def _away_from_zero(rng: np.random.Generator, shape) -> Tensor:
    """Values with |x| >= 0.1: clear of ReLU kinks as inputs, no vanishing coordinates as weights."""
    values = rng.standard_normal(shape)
    return Tensor(np.sign(values) * (0.1 + np.abs(values)), dtype="f64")


def _distinct(rng: np.random.Generator, shape) -> Tensor:
    """Spaced, shuffled values so max reductions have no near-ties."""
    n = int(np.prod(shape))
    return Tensor((rng.permutation(n) * 0.1 - 0.05 * n).reshape(shape), dtype="f64")


def _weighted(fn: Callable[[Tensor], Tensor], weight: np.ndarray) -> Callable[[Tensor], Tensor]:
    def scalar(t: Tensor) -> Tensor:
        out = fn(t)
        return F.sum_all(F.mul(out, Tensor(weight.reshape(out.shape))))
    return scalar


# ------------------------------------------------------------------------------
# Suites
# ------------------------------------------------------------------------------
def pr_suite(quick: bool = False) -> SuiteResult:
    rng = np.random.default_rng(0)
    count = 10 if quick else 100
    worst = {"f64": 0.0, "f32": 0.0}
    parseval = 0.0
    for i in range(count):
        B, C = 1 + i % 2, 1 + i % 4
        side = 2 * (1 + rng.integers(1, 16 if quick else 32))
        for dtype in ("f64", "f32"):
            x = _tensor(rng, (B, C, side, side), dtype)
            worst[dtype] = max(worst[dtype], verify_pr(x, tol=0.0).max_abs_residual)
            if dtype == "f32":
                with no_grad():
                    bands = dwt_stacked(x)
                n_in = np.linalg.norm(x.data.astype(np.float64))
                n_out = np.linalg.norm(bands.data.astype(np.float64))
                parseval = max(parseval, abs(n_out - n_in) / n_in)
    passed = worst["f64"] <= 1e-12 and worst["f32"] <= 1e-5 and parseval <= 1e-6
    return SuiteResult(name="pr", passed=passed, detail={
        "samples": count, "max_residual_f64": worst["f64"], "max_residual_f32": worst["f32"],
        "max_parseval_rel": parseval,
    })


def _op_cases(rng: np.random.Generator) -> Dict[str, tuple]:
    shape = (1, 2, 4, 4)
    other = _tensor(rng, shape)
    weight = _tensor(rng, (3, 2, 3, 3))
    bias = _tensor(rng, (3,))
    x_conv = _tensor(rng, shape)
    return {
        "add": (lambda t: F.add(t, other), _tensor(rng, shape)),
        "sub": (lambda t: F.sub(other, t), _tensor(rng, shape)),
        "mul": (lambda t: F.mul(t, other), _tensor(rng, shape)),
        "scale": (lambda t: F.scale(t, -0.7), _tensor(rng, shape)),
        "relu": (F.relu, _away_from_zero(rng, shape)),
        "sigmoid": (F.sigmoid, _tensor(rng, shape)),
        "expand": (lambda t: F.expand(t, (1, 2, 4, 4)), _tensor(rng, (1, 2, 1, 1))),
        "conv2d_input": (lambda t: F.conv2d(t, weight, bias, padding=1), _tensor(rng, shape)),
        "conv2d_weight": (lambda t: F.conv2d(x_conv, t, bias, padding=1), _tensor(rng, (3, 2, 3, 3))),
        "conv2d_stride2": (lambda t: F.conv2d(t, weight, None, stride=2, padding=1), _tensor(rng, (1, 2, 5, 5))),
        "concat": (lambda t: F.concat_channels([t, other, t]), _tensor(rng, shape)),
        "channel_slice": (lambda t: F.channel_slice(t, 1, 2), _tensor(rng, shape)),
        "global_avg": (lambda t: F.pool("global_avg", t), _tensor(rng, shape)),
        "global_max": (lambda t: F.pool("global_max", t), _distinct(rng, shape)),
        "channel_mean": (lambda t: F.pool("spatial_mean_over_channels", t), _tensor(rng, shape)),
        "channel_max": (lambda t: F.pool("spatial_max_over_channels", t), _distinct(rng, shape)),
        "avg_pool2x2": (F.avg_pool2x2, _tensor(rng, shape)),
        "upsample_bilinear": (lambda t: F.upsample(t, "bilinear"), _tensor(rng, shape)),
        "upsample_nearest": (lambda t: F.upsample(t, "nearest"), _tensor(rng, shape)),
        "dwt": (dwt_stacked, _tensor(rng, shape)),
        "idwt": (idwt_stacked, _tensor(rng, (1, 4, 2, 2))),
    }


def gradient_suite(quick: bool = False) -> SuiteResult:
    rng = np.random.default_rng(1)
    errors: Dict[str, float] = {}
    for name, (fn, x) in _op_cases(rng).items():
        with no_grad():
            out_shape = fn(x).shape
        weight = _away_from_zero(rng, out_shape).data
        errors[name] = grad_check(_weighted(fn, weight), x)
    errors["sum_all"] = grad_check(F.sum_all, _tensor(rng, (1, 2, 4, 4)))
    errors["mean_all"] = grad_check(F.mean_all, _tensor(rng, (1, 2, 4, 4)))

    block = SuperBlock(SuperBlockConfig.build(2, 4, zero_init_final=False), dtype="f64")
    block.assign_names("block.")
    block.initialize(seed=3, prefix="block.")
    x_e, x_d = _tensor(rng, (1, 2, 8, 8)), _tensor(rng, (1, 4, 4, 4))
    block_weight = _away_from_zero(rng, (1, 2, 8, 8))
    errors["super_block_skip"] = grad_check(lambda t: F.sum_all(F.mul(block(t, x_d), block_weight)), x_e)
    errors["super_block_deeper"] = grad_check(lambda t: F.sum_all(F.mul(block(x_e, t), block_weight)), x_d)
    coords = 6 if quick else None
    for name, err in grad_check_parameters(
        lambda: F.sum_all(F.mul(block(x_e, x_d), block_weight)), block.parameters(), max_coords_per_param=coords,
    ).items():
        errors[name] = err

    spec = ModelSpec(depth=1, stem_channels=2, fd_init=FdInit.RANDOM)
    model = build_model(spec, seed=5, dtype="f64")
    x = _tensor(rng, (1, 1, 8, 8))
    model_weight = _away_from_zero(rng, (1, 1, 8, 8))
    for name, err in grad_check_parameters(
        lambda: F.sum_all(F.mul(model(x), model_weight)), model.parameters(), max_coords_per_param=coords,
    ).items():
        errors[f"model.{name}"] = err

    worst = max(errors.values())
    failing = sorted(k for k, v in errors.items() if v > GRAD_TOL)
    return SuiteResult(name="gradients", passed=not failing, detail={
        "checked": len(errors), "max_relative_error": worst, "failing": failing,
    })


def identity_suite(quick: bool = False) -> SuiteResult:
    rng = np.random.default_rng(2)
    pairs = 5 if quick else 50
    worst_block = 0.0
    for i in range(pairs):
        config = SuperBlockConfig.build(2 + i % 3, 4 + i % 5, fusion="sum_ll" if i % 2 == 0 else "concat")
        block = SuperBlock(config, dtype="f32")
        block.initialize(seed=i)
        x_e = _tensor(rng, (1, config.skip_channels, 8, 8), "f32")
        x_d = _tensor(rng, (1, config.deeper_channels, 4, 4), "f32")
        with no_grad():
            out = block(x_e, x_d)
        worst_block = max(worst_block, float(np.max(np.abs(out.data - x_e.data))))

    model = build_model(ModelSpec(depth=2, stem_channels=4), seed=0, dtype="f32")
    with no_grad():
        trace = model.forward_with_trace(_tensor(rng, (2, 1, 16, 16), "f32"))
    worst_model = float(np.max(np.abs(trace.stage_outputs[0].data - trace.skips[0].data)))
    passed = worst_block <= 1e-5 and worst_model <= 1e-5
    return SuiteResult(name="identity", passed=passed, detail={
        "pairs": pairs, "max_block_deviation": worst_block, "max_model_deviation": worst_model,
    })


def _linear_map(rng: np.random.Generator, n: int, near_degenerate: bool = False) -> np.ndarray:
    """Gaussian n x n matrix; near_degenerate pins the second singular value 1e-9 below the first."""
    matrix = rng.standard_normal((n, n)) / np.sqrt(n)
    if not near_degenerate:
        return matrix
    u, s, vt = np.linalg.svd(matrix)
    s[1] = s[0] * (1.0 - 1e-9)
    return (u * s) @ vt


def norms_suite(quick: bool = False) -> SuiteResult:
    rng = np.random.default_rng(3)
    x = _tensor(rng, (1, 2, 4, 4))
    closed_form = {
        "identity": (jacobian_spectral_norm(lambda t: F.scale(t, 1.0), x).sigma, 1.0),
        "dwt": (jacobian_spectral_norm(dwt_stacked, x).sigma, 1.0),
        "scale_0.7": (jacobian_spectral_norm(lambda t: F.scale(t, 0.7), x).sigma, 0.7),
    }
    closed_ok = all(abs(got - want) <= NORM_TOL for got, want in closed_form.values())

    maps = 3 if quick else 20
    oracle_errors: List[float] = []
    for i in range(maps):
        channels = 4 + 4 * (i % 4)
        matrix = _linear_map(rng, channels, near_degenerate=(i == maps - 1))
        weight = Tensor(matrix.reshape(channels, channels, 1, 1))
        point = _tensor(rng, (1, channels, 2, 2))

        def conv1x1(t, weight=weight):
            return F.conv2d(t, weight)

        estimate = jacobian_spectral_norm(conv1x1, point).sigma
        oracle = dense_spectral_norm(materialize_jacobian(conv1x1, point))
        oracle_errors.append(abs(estimate - oracle) / oracle)
    oracle_ok = max(oracle_errors) <= ORACLE_TOL

    w1 = Tensor(_linear_map(rng, 4).reshape(4, 4, 1, 1))
    w2 = Tensor(_linear_map(rng, 4).reshape(4, 4, 1, 1))
    composition = composition_check(lambda t: F.conv2d(t, w1), lambda t: F.conv2d(t, w2), _tensor(rng, (1, 4, 2, 2)))

    models = 1 if quick else 10
    bound_results = []
    for seed in range(models):
        spec = ModelSpec(depth=2, stem_channels=2, fd_init=FdInit.RANDOM, fd_init_gain=0.01)
        model = build_model(spec, seed=seed, dtype="f64")
        result = stage_bound_check(model, _tensor(rng, (1, 1, 8, 8)), samples=2 if quick else None)
        bound_results.append(result)
    bound_ok = all(r.passed for r in bound_results)

    passed = closed_ok and oracle_ok and composition.holds and bound_ok
    return SuiteResult(name="norms", passed=passed, detail={
        "closed_form": {k: v[0] for k, v in closed_form.items()},
        "oracle_max_rel_error": max(oracle_errors),
        "composition": composition._asdict(),
        "bound_models": models,
        "max_sigma_total": max(r.sigma_total for r in bound_results),
        "min_bound": min(r.bound for r in bound_results),
    })


def macs_suite(quick: bool = False) -> SuiteResult:
    checks = {}
    for H, W, C in ((64, 64, 8), (32, 32, 16), (16, 8, 3)):
        regimes = mac_regimes(H, W, C)
        checks[f"{H}x{W}x{C}"] = (
            regimes.volume_conserved and regimes.linear_equal and regimes.conv_ratio == (4, 0)
        )
    report = count_macs(ModelSpec(depth=2, stem_channels=8), (1, 1, 64, 64))
    wavelet_rows = [r for r in report.rows if r.op in ("dwt", "idwt")]
    volumes_ok = all(r.input_volume == r.element_volume for r in wavelet_rows)
    totals_ok = report.total_macs == sum(r.macs for r in report.rows)
    passed = all(checks.values()) and volumes_ok and totals_ok and bool(wavelet_rows)
    return SuiteResult(name="macs", passed=passed, detail={
        "regimes": checks, "wavelet_rows": len(wavelet_rows),
        "total_macs": report.total_macs, "total_params": report.total_params,
    })


SUITES = {
    "pr": pr_suite,
    "gradients": gradient_suite,
    "identity": identity_suite,
    "norms": norms_suite,
    "macs": macs_suite,
}


def run_verification_suites(quick: bool = False) -> VerificationReport:
    results = []
    for name, suite in SUITES.items():
        result = suite(quick=quick)
        log = logger.info if result.passed else logger.error
        log(f"Suite {name}: {'passed' if result.passed else 'FAILED'} {result.detail}")
        results.append(result)
    return VerificationReport(suites=results)
