"""
End-to-end tests for the superdec command line.

Each test invokes the click group the way a user would and checks exit codes,
printed output and the artifacts written to disk.
"""

import json
import logging
from pathlib import Path

import pytest
from click.testing import CliRunner

from superdec.main import cli
from tests.conftest import tiny_config_payload

pytestmark = pytest.mark.e2e

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


@pytest.fixture
def runner():
    return CliRunner(mix_stderr=False)


@pytest.fixture(autouse=True)
def restore_root_logging():
    """The CLI reconfigures root logging; put the test session's handlers back afterwards."""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def tiny_config_file(tmp_path):
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(tiny_config_payload()))
    return path


def _error_line(result) -> dict:
    return json.loads(result.stderr.strip().splitlines()[-1])


# ======================================================================================
# Experiment Commands
# ======================================================================================
def test_gen(runner, tiny_config_file, tmp_path):
    out = tmp_path / "data"
    result = runner.invoke(cli, ["gen", "--config", str(tiny_config_file), "--out", str(out)])
    assert result.exit_code == 0, result.stderr
    assert (out / "train" / "images.supt").is_file()
    assert json.loads((out / "test" / "index.json").read_text())["count"] == 4


def test_train_then_eval(runner, tiny_config_file, tmp_path):
    out = tmp_path / "run"
    result = runner.invoke(cli, ["train", "--config", str(tiny_config_file), "--out", str(out)])
    assert result.exit_code == 0, result.stderr
    assert "final loss" in result.stdout
    for name in ("metrics.json", "timing.json", "checkpoint/manifest.json"):
        assert (out / name).is_file()

    result = runner.invoke(cli, ["eval", "--config", str(tiny_config_file),
                                 "--checkpoint", str(out / "checkpoint"), "--out", str(tmp_path / "eval")])
    assert result.exit_code == 0, result.stderr
    assert result.stdout.startswith("IoU overall")
    trained = json.loads((out / "metrics.json").read_text())["segmentation"]
    scored = json.loads((tmp_path / "eval" / "eval.json").read_text())["segmentation"]
    assert trained == scored


def test_train_with_shipped_tiny_config(runner, tmp_path):
    result = runner.invoke(cli, ["train", "--config", str(CONFIGS / "tiny.json"), "--out", str(tmp_path)])
    assert result.exit_code == 0, result.stderr


def test_compare(runner, tiny_config_file, tmp_path):
    out = tmp_path / "cmp"
    result = runner.invoke(cli, ["compare", "--task", "thin_lines", "--seeds", "1", "--epochs", "1",
                                 "--config", str(tiny_config_file), "--out", str(out)])
    assert result.exit_code == 0, result.stderr
    assert "non-inferior" in result.stdout
    summary = json.loads((out / "summary.json").read_text())
    assert summary["seeds"] == [0]
    epochs = json.loads((out / "seed0" / "super" / "metrics.json").read_text())["epochs"]
    assert len(epochs) == 1


# ======================================================================================
# Analysis Commands
# ======================================================================================
def test_verify_quick(runner, tmp_path):
    result = runner.invoke(cli, ["verify", "--quick", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.stdout + result.stderr
    lines = result.stdout.strip().splitlines()
    assert lines == [f"{name}: PASS" for name in ("pr", "gradients", "identity", "norms", "macs")]
    assert all(s["passed"] for s in json.loads((tmp_path / "verification.json").read_text())["suites"])


def test_macs_from_experiment_file(runner, tmp_path):
    result = runner.invoke(cli, ["macs", "--spec", str(CONFIGS / "tiny.json"), "--height", "16", "--width", "16",
                                 "--out", str(tmp_path)])
    assert result.exit_code == 0, result.stderr
    lines = result.stdout.strip().splitlines()
    assert lines[0].startswith("name,op,input_shape")
    assert lines[-1].startswith("TOTAL,")
    assert (tmp_path / "macs.csv").read_text().strip().splitlines() == lines


def test_macs_from_bare_spec(runner, tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"depth": 2, "stem_channels": 8}))
    result = runner.invoke(cli, ["macs", "--spec", str(spec)])
    assert result.exit_code == 0, result.stderr
    assert any(",dwt," in line for line in result.stdout.splitlines())


# ======================================================================================
# Failures
# ======================================================================================
def test_invalid_config_exits_2_with_field(runner, tmp_path):
    payload = tiny_config_payload()
    payload["train"]["lr"] = -1
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(payload))
    result = runner.invoke(cli, ["train", "--config", str(path), "--out", str(tmp_path / "run")])
    assert result.exit_code == 2
    error = _error_line(result)
    assert error["error"] == "ConfigError"
    assert error["field"] == "train.lr"


def test_missing_config_exits_2(runner, tmp_path):
    result = runner.invoke(cli, ["gen", "--config", str(tmp_path / "absent.json"), "--out", str(tmp_path)])
    assert result.exit_code == 2
    assert "not found" in _error_line(result)["message"]


def test_invalid_model_spec_exits_2(runner, tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"depth": 0}))
    result = runner.invoke(cli, ["macs", "--spec", str(spec)])
    assert result.exit_code == 2
    error = _error_line(result)
    assert error["error"] == "ValidationError"
    assert error["field"] == "depth"


def test_shape_error_exits_1(runner):
    result = runner.invoke(cli, ["macs", "--spec", str(CONFIGS / "tiny.json"), "--height", "9", "--width", "16"])
    assert result.exit_code == 1
    assert _error_line(result)["error"] == "ShapeError"


def test_compare_task_mismatch(runner, tiny_config_file):
    result = runner.invoke(cli, ["compare", "--task", "denoise", "--seeds", "1", "--config", str(tiny_config_file)])
    assert result.exit_code == 2
    assert _error_line(result)["field"] == "dataset.task"


def test_unexpected_error_exits_1_with_json_line(runner, monkeypatch, tiny_config_file, tmp_path):
    from superdec.services.experiment_service import ExperimentService

    def broken_disk(self, config):
        raise OSError("No space left on device")

    monkeypatch.setattr(ExperimentService, "generate", broken_disk)
    result = runner.invoke(cli, ["gen", "--config", str(tiny_config_file), "--out", str(tmp_path / "data")])
    assert result.exit_code == 1
    error = _error_line(result)
    assert error == {"error": "OSError", "message": "No space left on device", "field": None}


def test_failed_verification_reports_suites(runner, monkeypatch):
    from superdec.analysis import verification
    from superdec.schemas.reports import SuiteResult, VerificationReport

    report = VerificationReport(suites=[SuiteResult(name="pr", passed=True), SuiteResult(name="norms", passed=False)])
    monkeypatch.setattr(verification, "run_verification_suites", lambda quick=False: report)
    result = runner.invoke(cli, ["verify", "--quick"])
    assert result.exit_code == 1
    assert result.stdout.strip().splitlines() == ["pr: PASS", "norms: FAIL"]
    error = _error_line(result)
    assert error["error"] == "verification_failed"
    assert "norms" in error["message"]
