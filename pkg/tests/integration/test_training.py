# ======================================================================================
# tests/integration/test_training.py
# ======================================================================================
# Purpose: Drive the training loop end to end on tiny synthetic datasets: determinism,
#          recorded diagnostics, divergence and vanishing-gradient handling.
# ======================================================================================

import logging

import numpy as np
import pytest

from superdec.core.config import get_settings
from superdec.core.exceptions import TrainingDivergedError
from superdec.models.unet import build_model
from superdec.schemas.experiment import TrainConfig
from superdec.schemas.reports import MetricsReport
from superdec.services.tasks import DenoiseTask, TaskFactory, ThinLinesTask
from superdec.services.training import Trainer, epoch_order, identity_deviation, locate_non_finite, train
from superdec.tensor.tensor import Tensor

logger = logging.getLogger(__name__)


def _config(**overrides) -> TrainConfig:
    values = {"epochs": 2, "batch_size": 4, "lr": 1e-3, "seed": 0, "dtype": "f64"}
    values.update(overrides)
    return TrainConfig(**values)


# ======================================================================================
# Helpers
# ======================================================================================
def test_epoch_order_is_a_seeded_permutation():
    a = epoch_order(10, seed=3, epoch=1)
    assert sorted(a.tolist()) == list(range(10))
    np.testing.assert_array_equal(a, epoch_order(10, seed=3, epoch=1))
    assert not np.array_equal(a, epoch_order(10, seed=3, epoch=2))


def test_identity_deviation(tiny_model, baseline_spec, rng):
    x = Tensor(rng.standard_normal((2, 1, 8, 8)))
    assert identity_deviation(tiny_model, x) <= 1e-12
    assert identity_deviation(build_model(baseline_spec, seed=0, dtype="f64"), x) is None


# ======================================================================================
# Trainer
# ======================================================================================
class TestTrainer:
    def test_zero_learning_rate_keeps_parameters(self, tiny_model, thin_lines_dataset):
        before = tiny_model.state_dict()
        result = train(tiny_model, thin_lines_dataset, _config(lr=0.0), ThinLinesTask())
        after = result.model.state_dict()
        assert all(np.array_equal(before[k], after[k]) for k in before)
        assert len(result.report.epochs) == 2

    def test_same_seed_same_run(self, tiny_spec, thin_lines_dataset):
        runs = []
        for _ in range(2):
            model = build_model(tiny_spec, seed=0, dtype="f64")
            runs.append(train(model, thin_lines_dataset, _config(lr=1e-2), ThinLinesTask()))
        a, b = (r.model.state_dict() for r in runs)
        assert all(np.array_equal(a[k], b[k]) for k in a)
        assert runs[0].report.model_dump() == runs[1].report.model_dump()

    def test_training_moves_parameters(self, tiny_model, thin_lines_dataset):
        before = tiny_model.state_dict()
        after = train(tiny_model, thin_lines_dataset, _config(lr=1e-2), ThinLinesTask()).model.state_dict()
        assert any(not np.array_equal(before[k], after[k]) for k in before)

    def test_report_records(self, tiny_model, thin_lines_dataset):
        report = train(tiny_model, thin_lines_dataset, _config(epochs=3, eval_every=2), ThinLinesTask()).report
        assert [r.epoch for r in report.epochs] == [1, 2, 3]
        assert report.epochs[0].suppression_ratios is None
        assert report.epochs[1].suppression_ratios is not None
        assert report.epochs[2].suppression_ratios is not None
        assert report.final_loss == report.epochs[-1].loss
        assert set(report.first_batch_grad_norms) == {path for path, _ in tiny_model.named_parameters()}
        assert report.pr_residual_at_init <= 1e-12
        assert all(np.isfinite(r.loss) and r.grad_norm > 0 for r in report.epochs)

    def test_zero_epochs(self, tiny_model, thin_lines_dataset):
        report = train(tiny_model, thin_lines_dataset, _config(epochs=0), ThinLinesTask()).report
        assert report.epochs == []
        assert report.final_loss is None
        assert report.first_batch_grad_norms == {}
        assert max(report.suppression_ratios) <= 1e-12

    def test_casts_model_to_config_dtype(self, tiny_model, thin_lines_dataset):
        result = train(tiny_model, thin_lines_dataset, _config(dtype="f32", epochs=1), ThinLinesTask())
        assert result.model.dtype == np.float32
        assert tiny_model.dtype == np.float64

    def test_baseline_has_no_suppression_ratios(self, baseline_spec, thin_lines_dataset):
        model = build_model(baseline_spec, seed=0, dtype="f64")
        report = train(model, thin_lines_dataset, _config(epochs=1), ThinLinesTask()).report
        assert report.suppression_ratios is None
        assert report.pr_residual_at_init is None

    def test_denoise_task(self, tiny_model, denoise_dataset):
        report = train(tiny_model, denoise_dataset, _config(epochs=1), DenoiseTask()).report
        assert report.task == "denoise"
        assert report.final_loss > 0.0

    def test_non_finite_loss_raises(self, tiny_model, thin_lines_dataset):
        poisoned = thin_lines_dataset.model_copy(update={"inputs": np.full_like(thin_lines_dataset.inputs, np.nan)})
        with pytest.raises(TrainingDivergedError) as excinfo:
            train(tiny_model, poisoned, _config(), ThinLinesTask())
        assert excinfo.value.epoch == 1
        assert excinfo.value.batch == 1
        assert excinfo.value.layer == "input"
        assert "epoch 1, batch 1" in str(excinfo.value)

    def test_non_finite_layer_is_named(self, tiny_model, thin_lines_dataset):
        weight = next(w for p, w in tiny_model.named_parameters() if p.startswith("bottleneck."))
        weight.data[...] = np.inf
        with pytest.raises(TrainingDivergedError) as excinfo:
            train(tiny_model, thin_lines_dataset, _config(), ThinLinesTask())
        assert excinfo.value.layer == "bottleneck"
        assert locate_non_finite(tiny_model, Tensor(thin_lines_dataset.inputs[:2].astype(np.float64))) == "bottleneck"

    def test_vanishing_gradient_warning(self, monkeypatch, caplog, tiny_model, thin_lines_dataset):
        monkeypatch.setenv("GRAD_VANISH_THRESHOLD", "1e9")
        get_settings.cache_clear()
        report = MetricsReport(task="thin_lines", decoder_kind="super", seed=0, data_seed=7, dtype="f64")
        with caplog.at_level(logging.WARNING, logger="superdec.services.training"):
            Trainer(TaskFactory.create("thin_lines"), _config(epochs=1)).fit(tiny_model, thin_lines_dataset, report)
        assert any("Vanishing gradients" in record.getMessage() for record in caplog.records)


# ======================================================================================
# Learning Trends
# ======================================================================================
@pytest.mark.slow
@pytest.mark.parametrize("decoder_fixture", ["tiny_spec", "baseline_spec"])
def test_loss_decreases(request, decoder_fixture, thin_lines_dataset):
    spec = request.getfixturevalue(decoder_fixture)
    model = build_model(spec, seed=0, dtype="f64")
    report = train(model, thin_lines_dataset, _config(epochs=15, lr=1e-2), ThinLinesTask()).report
    logger.info(f"{spec.decoder_kind.value}: {[round(r.loss, 4) for r in report.epochs]}")
    assert report.epochs[-1].loss < report.epochs[0].loss
