# superdec/main.py
"""
Command-line entry point.

    superdec gen      --config C --out DIR       write train/test dataset fixtures
    superdec train    --config C --out DIR       train, evaluate, checkpoint
    superdec eval     --config C --checkpoint D --out DIR
    superdec verify   [--quick] [--out DIR]      invariant suites, exit 0 iff all pass
    superdec macs     --spec S [--height --width --batch] [--out DIR]
    superdec compare  --task T --seeds N [--config C] [--out DIR] [--epochs E]

Failures print one JSON line on stderr: {"error", "message", "field"}.
Malformed configuration exits 2, any other failure exits 1.
"""

import functools
import json
import logging
import sys
from pathlib import Path
from typing import Optional

import click
from pydantic import ValidationError

from superdec.core.exceptions import ConfigError, SuperDecError
from superdec.core.logging_config import configure_logging

logger = logging.getLogger(__name__)

EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _fail(payload: dict, code: int) -> None:
    click.echo(json.dumps(payload, sort_keys=True), err=True)
    sys.exit(code)


def handle_errors(command):
    """Map errors to the documented exit codes."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ConfigError as e:
            logger.error(f"Configuration error: {e}")
            _fail(e.to_dict(), EXIT_CONFIG)
        except ValidationError as e:
            from superdec.services.experiment_service import field_path
            logger.error(f"Validation error: {e}")
            _fail({"error": "ValidationError", "message": e.errors()[0]["msg"], "field": field_path(e)},
                  EXIT_CONFIG)
        except SuperDecError as e:
            logger.error(f"{type(e).__name__}: {e}")
            _fail(e.to_dict(), EXIT_RUNTIME)
        except Exception as e:
            logger.exception(f"Unexpected {type(e).__name__}: {e}")
            _fail({"error": type(e).__name__, "message": str(e), "field": None}, EXIT_RUNTIME)

    return wrapper


@click.group()
@click.option("--log-level", default=None, help="Overrides LOG_LEVEL")
def cli(log_level: Optional[str]):
    """Selectively suppressed perfect-reconstruction decoders: experiments and checks."""
    configure_logging(log_level)


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False))
@handle_errors
def gen(config_path: str, out: str):
    """Write the train and test splits of a config as dataset fixtures."""
    from superdec.services.experiment_service import ExperimentService, load_config

    config = load_config(config_path)
    ExperimentService(out).generate(config)
    click.echo(f"datasets written to {out}")


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False))
@handle_errors
def train(config_path: str, out: str):
    """Train one experiment and write checkpoint, metrics.json and timing.json."""
    from superdec.services.experiment_service import ExperimentService, load_config

    config = load_config(config_path)
    report = ExperimentService(out).run(config)
    click.echo(f"final loss {report.final_loss}; artifacts in {out}")


@cli.command(name="eval")
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@click.option("--checkpoint", required=True, type=click.Path(file_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False))
@handle_errors
def evaluate(config_path: str, checkpoint: str, out: str):
    """Score a checkpoint on the config's test split."""
    from superdec.services.experiment_service import ExperimentService, load_config

    config = load_config(config_path)
    report = ExperimentService(out).evaluate(config, checkpoint)
    if report.segmentation is not None:
        click.echo(f"IoU overall {report.segmentation.iou_overall!r}")
    else:
        click.echo(f"PSNR {report.psnr!r} dB")


@cli.command()
@click.option("--quick", is_flag=True, help="Fewer random cases per suite")
@click.option("--out", default=None, type=click.Path(file_okay=False))
@handle_errors
def verify(quick: bool, out: Optional[str]):
    """Run the invariant suites; exit 0 iff every suite passes."""
    from superdec.analysis.verification import run_verification_suites
    from superdec.repositories.report_repository import ReportRepository

    report = run_verification_suites(quick=quick)
    for suite in report.suites:
        click.echo(f"{suite.name}: {'PASS' if suite.passed else 'FAIL'}")
    if out:
        ReportRepository(out).save("verification.json", report)
    if not report.passed:
        failing = [s.name for s in report.suites if not s.passed]
        logger.error(f"Verification failed: {failing}")
        _fail({"error": "verification_failed", "message": f"failing suites: {', '.join(failing)}", "field": None},
              EXIT_RUNTIME)


@cli.command()
@click.option("--spec", "spec_path", required=True, type=click.Path(dir_okay=False))
@click.option("--height", default=64, show_default=True, type=int)
@click.option("--width", default=64, show_default=True, type=int)
@click.option("--batch", default=1, show_default=True, type=int)
@click.option("--out", default=None, type=click.Path(file_okay=False))
@handle_errors
def macs(spec_path: str, height: int, width: int, batch: int, out: Optional[str]):
    """Per-layer MAC and parameter counts of a model spec, as CSV."""
    from superdec.analysis.macs import count_macs
    from superdec.repositories.report_repository import ReportRepository
    from superdec.schemas.model_spec import ModelSpec

    try:
        payload = json.loads(Path(spec_path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read model spec {spec_path}: {e}") from e
    # an experiment file is accepted as well as a bare model spec
    spec = ModelSpec.model_validate(payload.get("model", payload))
    report = count_macs(spec, (batch, spec.in_channels, height, width))
    if out:
        ReportRepository(out).save_macs(report)
    for row in report.csv_rows():
        click.echo(",".join(row))


@cli.command()
@click.option("--task", required=True, type=click.Choice(["thin_lines", "denoise"]))
@click.option("--seeds", default=3, show_default=True, type=click.IntRange(min=1))
@click.option("--config", "config_path", default=None, type=click.Path(dir_okay=False))
@click.option("--out", default=None, type=click.Path(file_okay=False))
@click.option("--epochs", default=None, type=click.IntRange(min=0), help="Overrides train.epochs")
@handle_errors
def compare(task: str, seeds: int, config_path: Optional[str], out: Optional[str], epochs: Optional[int]):
    """Paired super-vs-baseline comparison over seeds 0..N-1."""
    from superdec.core.config import get_settings
    from superdec.services.experiment_service import ExperimentService, load_config, parse_config

    config = load_config(config_path) if config_path else parse_config({"dataset": {"task": task}})
    if config.dataset.task.value != task:
        raise ConfigError(f"--task {task} differs from the config's dataset.task", field_path="dataset.task")
    if epochs is not None:
        config = parse_config({**config.model_dump(mode="json"), "train": {
            **config.train.model_dump(mode="json"), "epochs": epochs}})
    out_dir = Path(out) if out else Path(get_settings().OUTPUT_DIR) / f"compare_{task}"
    summary = ExperimentService(out_dir).compare(config, seeds)
    click.echo(f"{summary.metric}: super {summary.super_mean!r} vs baseline {summary.baseline_mean!r}; "
               f"non-inferior {summary.non_inferior}; accepted {summary.accepted}")


def main():
    cli()


if __name__ == "__main__":
    main()
