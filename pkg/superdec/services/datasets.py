# superdec/services/datasets.py
"""
Synthetic Datasets

thin_lines: a smooth textured background with 1-3 dark anti-aliased
polyline strokes of one integer width w per image. The mask marks pixels
whose centre lies within w/2 of a stroke centreline; the width label is w.

denoise: clean images are low-pass filtered Gaussian noise rescaled to
[0.2, 0.8], so almost all energy sits in the Haar LL band; noisy images add
Gaussian noise of the configured sigma and clamp to [0, 1].

Every sample draws from np.random.default_rng([seed, index]), so a sample
does not depend on how many others are generated.
"""

import logging
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from superdec.schemas.dataset import SyntheticDataset
from superdec.schemas.experiment import DatasetSpec, Task
from superdec.tensor.tensor import Tensor, resolve_dtype

logger = logging.getLogger(__name__)

MAX_SINUSOIDS = 3
LOWPASS_CUTOFF = 0.06  # cycles per pixel


class LineSample(NamedTuple):
    image: Tensor
    mask: Tensor
    width_px: int


class DenoisePair(NamedTuple):
    noisy: Tensor
    clean: Tensor


def _sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, index])


def polyline_distance(size: int, vertices: Sequence[Tuple[float, float]]) -> np.ndarray:
    """Distance from every pixel centre of a size x size grid to a polyline given as (x, y) vertices."""
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64)
    best = np.full((size, size), np.inf)
    for (x0, y0), (x1, y1) in zip(vertices[:-1], vertices[1:]):
        dx, dy = x1 - x0, y1 - y0
        length2 = dx * dx + dy * dy
        if length2 == 0.0:
            t = np.zeros_like(xs)
        else:
            t = np.clip(((xs - x0) * dx + (ys - y0) * dy) / length2, 0.0, 1.0)
        best = np.minimum(best, np.hypot(xs - (x0 + t * dx), ys - (y0 + t * dy)))
    return best


def render_stroke(size: int, vertices: Sequence[Tuple[float, float]], width: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Anti-aliased darkness in [0, 1] and the binary mask of one stroke.

    Darkness falls off linearly over one pixel around the w/2 boundary.
    """
    distance = polyline_distance(size, vertices)
    darkness = np.clip(width / 2.0 + 0.5 - distance, 0.0, 1.0)
    mask = (distance <= width / 2.0).astype(np.float64)
    return darkness, mask


def _background(rng: np.random.Generator, size: int, amplitude: float) -> np.ndarray:
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64) / size
    level = rng.uniform(0.6, 0.85)
    count = int(rng.integers(1, MAX_SINUSOIDS + 1))
    # amplitudes sum to at most `amplitude`
    weights = rng.uniform(0.0, 1.0, count) * amplitude / count
    texture = np.zeros((size, size))
    for a in weights:
        fx, fy = rng.uniform(0.5, 3.0, 2) * rng.choice([-1.0, 1.0], 2)
        phase = rng.uniform(0.0, 2 * np.pi)
        texture += a * np.sin(2 * np.pi * (fx * xs + fy * ys) + phase)
    return level + texture


def _random_polyline(rng: np.random.Generator, size: int) -> List[Tuple[float, float]]:
    count = int(rng.integers(2, 5))
    margin = 0.1 * size
    return [tuple(rng.uniform(margin, size - 1 - margin, 2)) for _ in range(count)]


def thin_line_sample(spec: DatasetSpec, seed: int, index: int) -> Tuple[np.ndarray, np.ndarray, int]:
    rng = _sample_rng(seed, index)
    size = spec.size
    width = int(rng.integers(spec.min_width, spec.max_width + 1))
    image = _background(rng, size, spec.texture_amplitude)
    mask = np.zeros((size, size))
    for _ in range(int(rng.integers(spec.min_lines, spec.max_lines + 1))):
        darkness, stroke_mask = render_stroke(size, _random_polyline(rng, size), width)
        ink = rng.uniform(0.05, 0.3)
        image = image - darkness * (image - ink)
        mask = np.maximum(mask, stroke_mask)
    return np.clip(image, 0.0, 1.0), mask, width


def denoise_sample(spec: DatasetSpec, seed: int, index: int) -> Tuple[np.ndarray, np.ndarray]:
    rng = _sample_rng(seed, index)
    size = spec.size
    freqs = np.fft.fftfreq(size)
    radius2 = freqs[:, None] ** 2 + freqs[None, :] ** 2
    spectrum = np.fft.fft2(rng.standard_normal((size, size))) * np.exp(-radius2 / (2 * LOWPASS_CUTOFF ** 2))
    smooth = np.real(np.fft.ifft2(spectrum))
    span = smooth.max() - smooth.min()
    clean = 0.2 + 0.6 * (smooth - smooth.min()) / (span if span > 0 else 1.0)
    noisy = np.clip(clean + spec.noise_sigma * rng.standard_normal((size, size)), 0.0, 1.0)
    return noisy, clean


def gen_thin_lines(spec: DatasetSpec, seed: Optional[int] = None, dtype=None) -> List[LineSample]:
    """count samples of (image [1,1,S,S] in [0,1], binary mask [1,1,S,S], width in px)."""
    seed = spec.seed if seed is None else seed
    target = resolve_dtype(dtype)
    samples = []
    for index in range(spec.count):
        image, mask, width = thin_line_sample(spec, seed, index)
        samples.append(LineSample(
            image=Tensor(image[None, None].astype(target)),
            mask=Tensor(mask[None, None].astype(target)),
            width_px=width,
        ))
    return samples


def gen_denoise(spec: DatasetSpec, seed: Optional[int] = None, dtype=None) -> List[DenoisePair]:
    """count samples of (noisy, clean), each [1,1,S,S] in [0,1]."""
    seed = spec.seed if seed is None else seed
    target = resolve_dtype(dtype)
    pairs = []
    for index in range(spec.count):
        noisy, clean = denoise_sample(spec, seed, index)
        pairs.append(DenoisePair(noisy=Tensor(noisy[None, None].astype(target)),
                                 clean=Tensor(clean[None, None].astype(target))))
    return pairs


def build_dataset(spec: DatasetSpec, dtype=None) -> SyntheticDataset:
    """Generate spec.count samples and stack them into one SyntheticDataset."""
    if spec.task == Task.THIN_LINES:
        samples = gen_thin_lines(spec, dtype=dtype)
        inputs = np.concatenate([s.image.data for s in samples])
        targets = np.concatenate([s.mask.data for s in samples])
        widths = np.array([s.width_px for s in samples], dtype=np.int64)
    else:
        pairs = gen_denoise(spec, dtype=dtype)
        inputs = np.concatenate([p.noisy.data for p in pairs])
        targets = np.concatenate([p.clean.data for p in pairs])
        widths = None
    logger.info(f"Generated {spec.count} {spec.task.value} samples at {spec.size}x{spec.size} (seed {spec.seed})")
    return SyntheticDataset(spec=spec, inputs=inputs, targets=targets, widths=widths)
