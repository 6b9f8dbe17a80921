import logging
from typing import Dict

import numpy as np
import pytest

from superdec.core.config import get_settings
from superdec.models.unet import build_model
from superdec.schemas.experiment import DatasetSpec, ExperimentConfig, Task, TrainConfig
from superdec.schemas.model_spec import DecoderKind, FdInit, ModelSpec
from superdec.services.datasets import build_dataset

# ======================================================================================
# Logging Configuration
# ======================================================================================
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


# ======================================================================================
# Helper Functions
# ======================================================================================
def tiny_config_payload(task: str = "thin_lines", decoder: str = "super") -> Dict:
    """An experiment small enough to train in well under a second."""
    return {
        "model": {"depth": 1, "in_channels": 1, "stem_channels": 2, "decoder_kind": decoder},
        "dataset": {"task": task, "count": 6, "size": 8, "seed": 3},
        "train": {"epochs": 2, "batch_size": 3, "lr": 1e-3, "seed": 0},
        "test_count": 4,
    }


# ======================================================================================
# Settings Fixtures
# ======================================================================================
@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Every test sees settings rebuilt from its own environment."""
    monkeypatch.delenv("SUPER_SEED", raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


# ======================================================================================
# Data Fixtures
# ======================================================================================
@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def tiny_spec() -> ModelSpec:
    """L=1 SUPER model with stem width 2 and zero-initialized F_d."""
    return ModelSpec(depth=1, in_channels=1, stem_channels=2)


@pytest.fixture
def small_spec() -> ModelSpec:
    """The L=2 reference layout at reduced width."""
    return ModelSpec(depth=2, in_channels=1, stem_channels=4)


@pytest.fixture
def random_fd_spec() -> ModelSpec:
    return ModelSpec(depth=1, in_channels=1, stem_channels=2, fd_init=FdInit.RANDOM, fd_init_gain=0.5)


@pytest.fixture
def baseline_spec() -> ModelSpec:
    return ModelSpec(depth=1, in_channels=1, stem_channels=2, decoder_kind=DecoderKind.BASELINE)


@pytest.fixture
def tiny_model(tiny_spec):
    return build_model(tiny_spec, seed=0, dtype="f64")


@pytest.fixture
def thin_lines_spec() -> DatasetSpec:
    return DatasetSpec(task=Task.THIN_LINES, count=8, size=16, seed=7)


@pytest.fixture
def denoise_spec() -> DatasetSpec:
    return DatasetSpec(task=Task.DENOISE, count=8, size=16, seed=7)


@pytest.fixture
def thin_lines_dataset(thin_lines_spec):
    return build_dataset(thin_lines_spec)


@pytest.fixture
def denoise_dataset(denoise_spec):
    return build_dataset(denoise_spec)


@pytest.fixture
def tiny_config() -> ExperimentConfig:
    return ExperimentConfig.model_validate(tiny_config_payload())


@pytest.fixture
def tiny_train_config() -> TrainConfig:
    return TrainConfig(epochs=2, batch_size=4, lr=1e-3, seed=0)


@pytest.fixture
def output_dir(tmp_path):
    """Per-test output directory."""
    path = tmp_path / "out"
    path.mkdir()
    return path


# ======================================================================================
# Pytest Command-Line Options
# ======================================================================================
def pytest_addoption(parser):
    """
    Add custom command line options:
      --run-slow    : Run tests marked as slow (training-trend experiments)
    """
    parser.addoption("--run-slow", action="store_true", help="Run tests marked as slow")


def pytest_collection_modifyitems(config, items):
    """
    Skip tests marked as 'slow' unless --run-slow is specified.
    """
    if not config.getoption("--run-slow"):
        skip_slow = pytest.mark.skip(reason="use --run-slow to run")
        for item in items:
            if "slow" in item.keywords:
                item.add_marker(skip_slow)
