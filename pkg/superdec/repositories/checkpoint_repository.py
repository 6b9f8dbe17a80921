"""
Checkpoint Repository

A checkpoint is a directory holding one golden file per parameter, named by
its dotted path, plus manifest.json:

    {"spec": <ModelSpec>, "seed": int, "dtype": "f32"|"f64",
     "parameters": [{"name": str, "shape": [int, ...]}, ...]}
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from pydantic import ValidationError

from superdec.core.exceptions import CheckpointError, GoldenFormatError
from superdec.models.unet import UNet
from superdec.repositories.base import BaseRepository
from superdec.repositories.golden import load_golden, save_golden
from superdec.schemas.model_spec import ModelSpec

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"


@dataclass
class Checkpoint:
    model: UNet
    seed: int
    dtype: str

    @property
    def spec(self) -> ModelSpec:
        return self.model.spec


class CheckpointRepository(BaseRepository[Checkpoint]):
    """Stores trained models as golden tensors plus a manifest."""

    def save(self, name: str, item: Checkpoint) -> Path:
        directory = self.path_for(name)
        directory.mkdir(parents=True, exist_ok=True)
        entries = []
        for path, param in item.model.named_parameters():
            save_golden(directory / f"{path}.supt", param.data)
            entries.append({"name": path, "shape": list(param.shape)})
        manifest = {
            "spec": item.spec.model_dump(mode="json"),
            "seed": item.seed,
            "dtype": item.dtype,
            "parameters": entries,
        }
        (directory / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True))
        logger.info(f"Checkpoint written to {directory} ({len(entries)} tensors)")
        return directory

    def load(self, name: str) -> Checkpoint:
        """
        Rebuild the model described by a checkpoint's manifest.

        Raises:
            CheckpointError: if the manifest or a tensor file is missing or
                does not match the rebuilt model
        """
        directory = self.path_for(name)
        manifest_path = directory / MANIFEST
        if not manifest_path.is_file():
            raise CheckpointError(f"no {MANIFEST} in {directory}")
        try:
            manifest = json.loads(manifest_path.read_text())
            spec = ModelSpec.model_validate(manifest["spec"])
            seed, dtype = int(manifest["seed"]), manifest["dtype"]
        except (KeyError, ValueError, ValidationError) as e:
            raise CheckpointError(f"malformed manifest {manifest_path}: {e}") from e

        model = UNet(spec, dtype=dtype)
        model.assign_names()
        declared = {entry["name"]: tuple(entry["shape"]) for entry in manifest.get("parameters", [])}
        unexpected = sorted(set(declared) - {path for path, _ in model.named_parameters()})
        if unexpected:
            raise CheckpointError(f"manifest lists parameters the model does not have: {unexpected}")
        state = {}
        for path, param in model.named_parameters():
            if declared.get(path) != param.shape:
                raise CheckpointError(f"{path}: manifest shape {declared.get(path)} does not match {param.shape}")
            try:
                state[path] = load_golden(directory / f"{path}.supt", shape=param.shape)
            except GoldenFormatError as e:
                raise CheckpointError(f"{path}: {e}") from e
        model.load_state_dict(state)
        logger.info(f"Checkpoint loaded from {directory}")
        return Checkpoint(model=model, seed=seed, dtype=dtype)
