# superdec/services/experiment_service.py
"""
Experiment Service

Orchestrates one experiment end to end: generate the train and test splits,
build the model, train, evaluate, and persist checkpoint, metrics.json and
timing.json under one output directory. compare() runs the paired
super-vs-baseline protocol over several seeds.

Layout of a run directory:

    <out>/checkpoint/      parameters + manifest.json
    <out>/metrics.json     MetricsReport (byte-identical across reruns)
    <out>/timing.json      wall-clock seconds per phase
"""

import json
import logging
import time
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import ValidationError

from superdec.analysis.macs import count_macs
from superdec.core.config import get_settings
from superdec.core.exceptions import ConfigError
from superdec.models.unet import build_model
from superdec.repositories.checkpoint_repository import Checkpoint, CheckpointRepository
from superdec.repositories.dataset_repository import DatasetRepository
from superdec.repositories.report_repository import ReportRepository
from superdec.schemas.dataset import SyntheticDataset
from superdec.schemas.experiment import ExperimentConfig, Task
from superdec.schemas.model_spec import DecoderKind
from superdec.schemas.reports import ComparisonRow, ComparisonSummary, MetricsReport
from superdec.services.tasks import TaskFactory, TaskStrategy
from superdec.services.training import Trainer

logger = logging.getLogger(__name__)

HARNESS_NOTES = [
    "epochs, batch size, learning rate and dataset scale are harness choices, not published settings",
    "segmentation reports IoU only; no topology score is computed",
]

# Non-inferiority margins of the paired comparison
MARGINS = {Task.THIN_LINES: ("iou_0_2", 0.01), Task.DENOISE: ("psnr", 0.1)}
DENOISE_GAIN_DB = 1.0


def field_path(error: ValidationError) -> Optional[str]:
    """Dotted location of the first validation error, None for model-level errors."""
    errors = error.errors()
    if not errors or not errors[0].get("loc"):
        return None
    return ".".join(str(part) for part in errors[0]["loc"])


def parse_config(payload: dict) -> ExperimentConfig:
    """
    Validate an experiment payload and apply the SUPER_SEED override.

    Raises:
        ConfigError: carrying the dotted path of the offending field
    """
    try:
        config = ExperimentConfig.model_validate(payload)
    except ValidationError as e:
        raise ConfigError(f"invalid experiment config: {e.errors()[0]['msg']}", field_path=field_path(e)) from e
    override = get_settings().SUPER_SEED
    if override is not None:
        logger.info(f"SUPER_SEED={override} overrides train.seed={config.train.seed}")
        config = config.with_seed(override)
    return config


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e
    return parse_config(payload)


class ExperimentService:
    """
    Runs experiments described by an ExperimentConfig.

    Attributes:
        output_dir: root under which every run writes its artifacts
    """

    def __init__(self, output_dir: Union[str, Path, None] = None):
        self.output_dir = Path(output_dir or get_settings().OUTPUT_DIR)

    def datasets(self, config: ExperimentConfig, task: Optional[TaskStrategy] = None
                 ) -> Tuple[SyntheticDataset, SyntheticDataset]:
        task = task or TaskFactory.create(config.dataset.task)
        return task.generate(config.dataset), task.generate(config.test_dataset)

    def generate(self, config: ExperimentConfig) -> Path:
        """Write the train and test splits as dataset fixtures."""
        train, test = self.datasets(config)
        repo = DatasetRepository(self.output_dir)
        repo.save("train", train)
        repo.save("test", test)
        return self.output_dir

    def new_report(self, config: ExperimentConfig) -> MetricsReport:
        size = config.dataset.size
        macs = count_macs(config.model, (1, config.model.in_channels, size, size))
        return MetricsReport(
            task=config.dataset.task.value,
            decoder_kind=config.model.decoder_kind.value,
            seed=config.train.seed,
            data_seed=config.dataset.seed,
            dtype=config.train.dtype,
            total_macs=macs.total_macs,
            total_params=macs.total_params,
            notes=list(HARNESS_NOTES),
        )

    def run(self, config: ExperimentConfig,
            data: Optional[Tuple[SyntheticDataset, SyntheticDataset]] = None) -> MetricsReport:
        """
        Train and evaluate one configuration; artifacts go to output_dir.

        Args:
            config: validated experiment
            data: pre-generated (train, test) splits, generated from config when omitted

        Returns:
            The MetricsReport also written to metrics.json
        """
        timing: Dict[str, float] = {}
        task = TaskFactory.create(config.dataset.task)

        started = time.perf_counter()
        train_set, test_set = data if data is not None else self.datasets(config, task)
        timing["generate_s"] = time.perf_counter() - started

        logger.info(f"Running {config.model.decoder_kind.value} on {config.dataset.task.value}, "
                    f"seed {config.train.seed}, {config.train.epochs} epochs -> {self.output_dir}")
        model = build_model(config.model, seed=config.train.seed, dtype=config.train.dtype)
        report = self.new_report(config)

        started = time.perf_counter()
        result = Trainer(task, config.train).fit(model, train_set, report)
        timing["train_s"] = time.perf_counter() - started

        started = time.perf_counter()
        task.evaluate(result.model, test_set, result.report)
        timing["evaluate_s"] = time.perf_counter() - started

        CheckpointRepository(self.output_dir).save(
            "checkpoint", Checkpoint(model=result.model, seed=config.train.seed, dtype=config.train.dtype))
        reports = ReportRepository(self.output_dir)
        reports.save_metrics(result.report)
        reports.save("timing.json", timing)
        return result.report

    def evaluate(self, config: ExperimentConfig, checkpoint_dir: Union[str, Path]) -> MetricsReport:
        """Score a saved checkpoint on the config's test split and write eval.json."""
        checkpoint_dir = Path(checkpoint_dir)
        checkpoint = CheckpointRepository(checkpoint_dir.parent).load(checkpoint_dir.name)
        if checkpoint.spec != config.model:
            raise ConfigError("checkpoint model spec differs from the config's model", field_path="model")
        task = TaskFactory.create(config.dataset.task)
        report = self.new_report(config)
        report.seed = checkpoint.seed
        report.dtype = checkpoint.dtype
        task.evaluate(checkpoint.model, task.generate(config.test_dataset), report)
        ReportRepository(self.output_dir).save("eval.json", report)
        return report

    def compare(self, config: ExperimentConfig, seeds: int) -> ComparisonSummary:
        """
        Paired super-vs-baseline runs for seeds 0..seeds-1.

        Both arms of a pair share the data splits and the training seed, so
        their encoders start from identical parameters. Writes the per-run
        directories, comparison.csv and summary.json.
        """
        task_kind = config.dataset.task
        data = self.datasets(config)
        reports: Dict[Tuple[int, str], MetricsReport] = {}
        for seed in range(seeds):
            for kind in (DecoderKind.SUPER, DecoderKind.BASELINE):
                arm = config.model_copy(update={"model": config.model.model_copy(update={"decoder_kind": kind})})
                arm = arm.with_seed(seed)
                runner = ExperimentService(self.output_dir / f"seed{seed}" / kind.value)
                reports[(seed, kind.value)] = runner.run(arm, data=data)

        rows = comparison_rows(task_kind, reports)
        repo = ReportRepository(self.output_dir)
        if task_kind == Task.THIN_LINES:
            repo.save_csv("comparison.csv", ["seed", "decoder", "bucket", "iou"],
                          [[r.seed, r.decoder, r.bucket, _fmt(r.value)] for r in rows])
        else:
            repo.save_csv("comparison.csv", ["seed", "decoder", "psnr"],
                          [[r.seed, r.decoder, _fmt(r.value)] for r in rows])
        summary = summarize(task_kind, list(range(seeds)), reports)
        repo.save("summary.json", summary)
        return summary


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def comparison_rows(task: Task, reports: Dict[Tuple[int, str], MetricsReport]) -> List[ComparisonRow]:
    rows = []
    for (seed, decoder), report in sorted(reports.items()):
        if task == Task.THIN_LINES:
            for bucket, value in report.segmentation.bucket_items():
                rows.append(ComparisonRow(seed=seed, decoder=decoder, bucket=bucket, value=value))
        else:
            rows.append(ComparisonRow(seed=seed, decoder=decoder, value=report.psnr))
    return rows


def _metric(report: MetricsReport, name: str) -> Optional[float]:
    if name == "psnr":
        return report.psnr
    return getattr(report.segmentation, name)


def summarize(task: Task, seeds: List[int], reports: Dict[Tuple[int, str], MetricsReport]) -> ComparisonSummary:
    """Arm means, paired mean difference (super - baseline) and the non-inferiority verdict."""
    metric, margin = MARGINS[task]
    notes = [f"non-inferior when super mean >= baseline mean - {margin}"]
    pairs = []
    for seed in seeds:
        s = _metric(reports[(seed, DecoderKind.SUPER.value)], metric)
        b = _metric(reports[(seed, DecoderKind.BASELINE.value)], metric)
        if s is not None and b is not None:
            pairs.append((s, b))
    if not pairs:
        notes.append(f"no seed produced {metric} for both decoders")
        return ComparisonSummary(task=task.value, seeds=seeds, metric=metric, super_mean=None,
                                 baseline_mean=None, paired_mean_difference=None, margin=margin,
                                 non_inferior=False, notes=notes)
    values = np.asarray(pairs, dtype=np.float64)
    super_mean, baseline_mean = float(values[:, 0].mean()), float(values[:, 1].mean())
    verdict = super_mean >= baseline_mean - margin
    input_psnr, denoises = None, None
    if task == Task.DENOISE:
        input_psnr = float(np.mean([r.input_psnr for r in reports.values()]))
        denoises = min(super_mean, baseline_mean) >= input_psnr + DENOISE_GAIN_DB
        notes.append(f"noisy input PSNR {input_psnr!r} dB; both arms gain >= {DENOISE_GAIN_DB} dB: {denoises}")
    accepted = verdict and denoises is not False
    logger.info(f"{task.value}: super {super_mean:.4f} vs baseline {baseline_mean:.4f} "
                f"({metric}, {len(pairs)} paired seeds), non-inferior: {verdict}, accepted: {accepted}")
    return ComparisonSummary(
        task=task.value,
        seeds=seeds,
        metric=metric,
        super_mean=super_mean,
        baseline_mean=baseline_mean,
        paired_mean_difference=float((values[:, 0] - values[:, 1]).mean()),
        margin=margin,
        non_inferior=verdict,
        input_psnr=input_psnr,
        denoise_gain_met=denoises,
        accepted=accepted,
        notes=notes,
    )
