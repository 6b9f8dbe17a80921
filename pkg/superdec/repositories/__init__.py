"""
Repository layer: golden tensor files, checkpoints, dataset fixtures and reports.
"""

from superdec.repositories.base import BaseRepository
from superdec.repositories.checkpoint_repository import Checkpoint, CheckpointRepository
from superdec.repositories.dataset_repository import DatasetRepository
from superdec.repositories.golden import load_golden, save_golden
from superdec.repositories.report_repository import ReportRepository

__all__ = [
    "BaseRepository",
    "load_golden",
    "save_golden",
    "Checkpoint",
    "CheckpointRepository",
    "DatasetRepository",
    "ReportRepository",
]
