"""
Dataset Repository

A dataset directory holds images.supt and targets.supt ([N, 1, S, S]) and
index.json with the generating spec and, for thin_lines, one width label
per image. PNG previews (inputs/NNNN.png, targets/NNNN.png) are optional.
"""

import json
import logging
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image
from pydantic import ValidationError

from superdec.core.config import get_settings
from superdec.core.exceptions import GoldenFormatError
from superdec.repositories.base import BaseRepository
from superdec.repositories.golden import load_golden, save_golden
from superdec.schemas.dataset import SyntheticDataset
from superdec.schemas.experiment import DatasetSpec

logger = logging.getLogger(__name__)

INDEX = "index.json"


def _to_png(array: np.ndarray, path: Path) -> None:
    pixels = np.clip(np.rint(array * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(pixels).save(path)


class DatasetRepository(BaseRepository[SyntheticDataset]):
    """Writes and reads generated datasets as golden tensors."""

    def __init__(self, root, previews: Optional[bool] = None, preview_limit: int = 16):
        super().__init__(root)
        self.previews = get_settings().PNG_PREVIEWS if previews is None else previews
        self.preview_limit = preview_limit

    def save(self, name: str, item: SyntheticDataset) -> Path:
        directory = self.path_for(name)
        directory.mkdir(parents=True, exist_ok=True)
        save_golden(directory / "images.supt", item.inputs)
        save_golden(directory / "targets.supt", item.targets)
        index = {
            "task": item.spec.task.value,
            "spec": item.spec.model_dump(mode="json"),
            "count": len(item),
            "widths": None if item.widths is None else [int(w) for w in item.widths],
        }
        (directory / INDEX).write_text(json.dumps(index, indent=2, sort_keys=True))
        if self.previews:
            self.write_previews(directory, item)
        logger.info(f"Dataset of {len(item)} {item.spec.task.value} samples written to {directory}")
        return directory

    def write_previews(self, directory: Path, item: SyntheticDataset) -> None:
        for sub in ("inputs", "targets"):
            (directory / sub).mkdir(exist_ok=True)
        for i in range(min(len(item), self.preview_limit)):
            _to_png(item.inputs[i, 0], directory / "inputs" / f"{i:04d}.png")
            _to_png(item.targets[i, 0], directory / "targets" / f"{i:04d}.png")

    def load(self, name: str) -> SyntheticDataset:
        directory = self.path_for(name)
        index_path = directory / INDEX
        if not index_path.is_file():
            raise GoldenFormatError(f"no {INDEX} in {directory}")
        try:
            index = json.loads(index_path.read_text())
            spec = DatasetSpec.model_validate(index["spec"])
        except (KeyError, ValueError, ValidationError) as e:
            raise GoldenFormatError(f"malformed dataset index {index_path}: {e}") from e
        widths = index.get("widths")
        return SyntheticDataset(
            spec=spec,
            inputs=load_golden(directory / "images.supt"),
            targets=load_golden(directory / "targets.supt"),
            widths=None if widths is None else np.asarray(widths, dtype=np.int64),
        )
