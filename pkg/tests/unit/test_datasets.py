"""
Unit tests for the synthetic thin-line and denoising generators.
"""

import numpy as np
import pytest

from superdec.schemas.experiment import DatasetSpec, Task
from superdec.services.datasets import (
    build_dataset,
    denoise_sample,
    gen_denoise,
    gen_thin_lines,
    polyline_distance,
    render_stroke,
    thin_line_sample,
)
from superdec.wavelet.haar import dwt_haar, subband_energy


pytestmark = pytest.mark.fast


class TestStrokes:
    def test_distance_to_horizontal_segment(self):
        distance = polyline_distance(8, [(1.0, 3.0), (6.0, 3.0)])
        assert distance[3, 2] == 0.0
        assert distance[5, 4] == pytest.approx(2.0)
        # beyond the end point the distance is to the vertex
        assert distance[3, 7] == pytest.approx(1.0)

    def test_width_one_mask_matches_stroke_length(self):
        """A diagonal width-1 stroke covers about one pixel per unit length."""
        size = 64
        start, end = (5.0, 8.0), (58.0, 50.0)
        _, mask = render_stroke(size, [start, end], width=1)
        length = float(np.hypot(end[0] - start[0], end[1] - start[1]))
        assert abs(mask.sum() - length) <= 0.2 * length

    def test_mask_is_binary_and_darkness_bounded(self):
        darkness, mask = render_stroke(16, [(2.0, 2.0), (13.0, 9.0), (4.0, 13.0)], width=3)
        assert set(np.unique(mask)) <= {0.0, 1.0}
        assert darkness.min() >= 0.0 and darkness.max() <= 1.0
        # every masked pixel is fully dark
        assert np.all(darkness[mask == 1.0] >= 0.5)

    def test_wider_strokes_cover_more(self):
        vertices = [(3.0, 3.0), (12.0, 12.0)]
        areas = [render_stroke(16, vertices, width=w)[1].sum() for w in (1, 2, 3, 4)]
        assert areas == sorted(areas)
        assert areas[0] < areas[-1]


class TestThinLines:
    def test_samples_are_in_range(self, thin_lines_spec):
        for sample in gen_thin_lines(thin_lines_spec):
            assert sample.image.shape == (1, 1, 16, 16)
            assert sample.image.data.min() >= 0.0 and sample.image.data.max() <= 1.0
            assert set(np.unique(sample.mask.data)) <= {0.0, 1.0}
            assert sample.mask.data.sum() > 0
            assert 1 <= sample.width_px <= 4

    def test_same_seed_is_bitwise_identical(self, thin_lines_spec):
        a = build_dataset(thin_lines_spec)
        b = build_dataset(thin_lines_spec)
        assert a.inputs.tobytes() == b.inputs.tobytes()
        assert a.targets.tobytes() == b.targets.tobytes()
        np.testing.assert_array_equal(a.widths, b.widths)

    def test_sample_does_not_depend_on_count(self, thin_lines_spec):
        longer = thin_lines_spec.model_copy(update={"count": 20})
        image_a, mask_a, width_a = thin_line_sample(thin_lines_spec, 7, 3)
        image_b, mask_b, width_b = thin_line_sample(longer, 7, 3)
        np.testing.assert_array_equal(image_a, image_b)
        assert width_a == width_b

    def test_other_seed_differs(self, thin_lines_spec):
        a = gen_thin_lines(thin_lines_spec, seed=1)[0].image.data
        b = gen_thin_lines(thin_lines_spec, seed=2)[0].image.data
        assert not np.array_equal(a, b)

    def test_width_range_respected(self):
        spec = DatasetSpec(task=Task.THIN_LINES, count=20, size=16, min_width=3, max_width=4)
        widths = build_dataset(spec).widths
        assert set(widths.tolist()) <= {3, 4}

    def test_strokes_are_darker_than_background(self, thin_lines_dataset):
        on = thin_lines_dataset.inputs[thin_lines_dataset.targets == 1.0].mean()
        off = thin_lines_dataset.inputs[thin_lines_dataset.targets == 0.0].mean()
        assert on < off

    def test_dtype_follows_request(self, thin_lines_spec):
        assert gen_thin_lines(thin_lines_spec, dtype="f64")[0].image.dtype == np.float64
        assert build_dataset(thin_lines_spec).inputs.dtype == np.float32


class TestDenoise:
    def test_sigma_zero_gives_clean_input(self, denoise_spec):
        spec = denoise_spec.model_copy(update={"noise_sigma": 0.0})
        for pair in gen_denoise(spec):
            np.testing.assert_array_equal(pair.noisy.data, pair.clean.data)

    def test_clean_images_are_low_frequency(self):
        spec = DatasetSpec(task=Task.DENOISE, count=5, size=64, seed=0)
        for pair in gen_denoise(spec, dtype="f64"):
            assert subband_energy(dwt_haar(pair.clean)).ll > 0.8

    def test_clean_range(self, denoise_spec):
        _, clean = denoise_sample(denoise_spec, 0, 0)
        assert clean.min() == pytest.approx(0.2)
        assert clean.max() == pytest.approx(0.8)

    def test_noisy_is_clamped(self):
        spec = DatasetSpec(task=Task.DENOISE, count=4, size=16, noise_sigma=0.9)
        dataset = build_dataset(spec)
        assert dataset.inputs.min() >= 0.0 and dataset.inputs.max() <= 1.0

    def test_no_width_labels(self, denoise_dataset):
        assert denoise_dataset.widths is None
        assert denoise_dataset.inputs.shape == denoise_dataset.targets.shape == (8, 1, 16, 16)

    def test_input_psnr_near_twenty_db(self):
        spec = DatasetSpec(task=Task.DENOISE, count=20, size=32, noise_sigma=0.1, seed=4)
        dataset = build_dataset(spec, dtype="f64")
        err = np.mean((dataset.inputs - dataset.targets) ** 2, axis=(1, 2, 3))
        assert np.mean(-10 * np.log10(err)) == pytest.approx(20.0, abs=0.5)


def test_subset_keeps_alignment(thin_lines_dataset):
    index = np.array([5, 1])
    subset = thin_lines_dataset.subset(index)
    assert len(subset) == 2
    np.testing.assert_array_equal(subset.inputs[0], thin_lines_dataset.inputs[5])
    assert subset.widths[1] == thin_lines_dataset.widths[1]


def test_dataset_rejects_mismatched_arrays(thin_lines_dataset):
    from superdec.schemas.dataset import SyntheticDataset
    with pytest.raises(ValueError):
        SyntheticDataset(spec=thin_lines_dataset.spec, inputs=thin_lines_dataset.inputs,
                         targets=thin_lines_dataset.targets[:2])
