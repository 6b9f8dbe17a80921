"""
Unit tests for spec, config and report validation.
"""

import pytest
from pydantic import ValidationError

from superdec.schemas.experiment import DatasetSpec, ExperimentConfig, LossKind, Task, TrainConfig
from superdec.schemas.model_spec import (
    CbamSpec,
    DoubleConvSpec,
    FusionMode,
    ModelSpec,
    SuperBlockConfig,
)
from superdec.schemas.reports import MacReport, MacRow


pytestmark = pytest.mark.fast


class TestSuperBlockConfig:
    def test_build_sum_ll_widths(self):
        config = SuperBlockConfig.build(skip_channels=8, deeper_channels=16)
        assert config.fd_spec.in_channels == 32
        assert config.fd_spec.out_channels == 32
        assert config.fd_spec.final_relu is False
        assert config.fd_spec.zero_init_final is True

    def test_build_concat_widths(self):
        config = SuperBlockConfig.build(skip_channels=8, deeper_channels=16, fusion=FusionMode.CONCAT)
        assert config.fused_channels == 48
        assert config.fd_spec.in_channels == 48

    def test_fd_output_must_be_four_times_skip(self):
        with pytest.raises(ValidationError, match="4 \\* skip_channels"):
            SuperBlockConfig(skip_channels=4, deeper_channels=8,
                             fd_spec=DoubleConvSpec(in_channels=16, out_channels=12))

    def test_fd_input_must_match_fusion(self):
        with pytest.raises(ValidationError, match="fused width"):
            SuperBlockConfig(skip_channels=4, deeper_channels=8, fusion=FusionMode.CONCAT,
                             fd_spec=DoubleConvSpec(in_channels=16, out_channels=16))


class TestCbamSpec:
    def test_hidden_width_is_clamped(self):
        assert CbamSpec(channels=2, reduction=4).hidden_channels == 1
        assert CbamSpec(channels=16, reduction=4).hidden_channels == 4

    def test_even_kernel_rejected(self):
        with pytest.raises(ValidationError):
            CbamSpec(channels=4, spatial_kernel=6)


class TestModelSpec:
    def test_widths_double(self):
        spec = ModelSpec(depth=2, stem_channels=8)
        assert spec.widths == [8, 16, 32]
        assert spec.size_multiple == 4

    def test_stage_config_follows_spec(self):
        spec = ModelSpec(depth=2, stem_channels=4, use_cbam=False, fusion=FusionMode.CONCAT)
        config = spec.stage_config(2)
        assert (config.skip_channels, config.deeper_channels) == (8, 16)
        assert config.use_cbam is False
        assert config.fusion == FusionMode.CONCAT

    def test_depth_bounds(self):
        with pytest.raises(ValidationError):
            ModelSpec(depth=0)

    def test_frozen(self):
        spec = ModelSpec()
        with pytest.raises(ValidationError):
            spec.depth = 3


class TestExperimentConfig:
    def test_defaults_are_the_desk_scale_protocol(self):
        config = ExperimentConfig()
        assert (config.dataset.count, config.dataset.size, config.test_count) == (500, 64, 100)
        assert (config.model.depth, config.model.stem_channels) == (2, 8)
        assert config.train.lr == 1e-3
        assert config.loss == LossKind.BCE

    def test_denoise_defaults_to_mse(self):
        config = ExperimentConfig(dataset=DatasetSpec(task=Task.DENOISE))
        assert config.loss == LossKind.MSE

    def test_wrong_loss_for_task(self):
        with pytest.raises(ValidationError, match="must be bce"):
            ExperimentConfig(train=TrainConfig(loss=LossKind.MSE))

    def test_size_must_fit_depth(self):
        with pytest.raises(ValidationError, match="not divisible"):
            ExperimentConfig(model=ModelSpec(depth=4), dataset=DatasetSpec(size=8, count=16))

    def test_count_at_least_batch(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(dataset=DatasetSpec(count=4), train=TrainConfig(batch_size=8))

    def test_field_path_of_nested_error(self):
        with pytest.raises(ValidationError) as excinfo:
            ExperimentConfig.model_validate({"train": {"lr": -1.0}})
        assert excinfo.value.errors()[0]["loc"] == ("train", "lr")

    def test_test_split_uses_another_seed(self):
        config = ExperimentConfig(dataset=DatasetSpec(seed=5))
        assert config.test_dataset.seed != config.dataset.seed
        assert config.test_dataset.count == config.test_count

    def test_with_seed(self):
        assert ExperimentConfig().with_seed(9).train.seed == 9


class TestDatasetSpec:
    def test_size_power_of_two(self):
        with pytest.raises(ValidationError, match="power of two"):
            DatasetSpec(size=48)

    def test_width_range(self):
        with pytest.raises(ValidationError):
            DatasetSpec(min_width=3, max_width=2)
        with pytest.raises(ValidationError):
            DatasetSpec(max_width=5)


class TestMacReport:
    def test_totals_must_match_rows(self):
        row = MacRow(name="a", op="relu", input_shape=(1, 1, 2, 2), output_shape=(1, 1, 2, 2), macs=4)
        with pytest.raises(ValidationError):
            MacReport(rows=[row], total_macs=5, total_params=0)
        report = MacReport.from_rows([row])
        assert report.total_macs == 4

    def test_csv_rows_end_with_total(self):
        row = MacRow(name="a", op="conv3x3", input_shape=(1, 1, 4, 4), output_shape=(1, 2, 4, 4),
                     macs=288, params=20)
        rows = MacReport.from_rows([row]).csv_rows()
        assert rows[0][0] == "name"
        assert rows[1][2:4] == ["1x1x4x4", "1x2x4x4"]
        assert rows[-1] == ["TOTAL", "", "", "", "", "", "288", "20"]
