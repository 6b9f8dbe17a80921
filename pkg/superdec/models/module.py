# superdec/models/module.py
"""
Module Base

Parameter ownership, dotted naming and deterministic initialization for
every neural building block.

A Module finds its parameters and children by walking its attributes in
assignment order, so a path like "dec.stage2.fd.conv1.weight" mirrors the
attribute chain that reaches the tensor.

Initialization draws each parameter from its own generator seeded by
(model seed, crc32 of the parameter path). Two models that share a seed
and a parameter path therefore start from identical values for that
parameter, whatever else differs between them.
"""

import copy
import zlib
from abc import ABC, abstractmethod
from typing import Dict, Iterator, List, Sequence, Tuple, Union

import numpy as np

from superdec.core.exceptions import CheckpointError
from superdec.schemas.reports import MacRow
from superdec.tensor.tensor import Parameter, resolve_dtype

Shape = Tuple[int, int, int, int]


def parameter_rng(seed: int, path: str) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, zlib.crc32(path.encode("utf-8"))])


class Module(ABC):
    """
    Abstract base for layers and blocks.

    Subclasses assign Parameters and child Modules as attributes, implement
    forward, and implement profile to report MAC rows for a given input
    shape without running any arithmetic.
    """

    @abstractmethod
    def forward(self, *args, **kwargs):
        pass

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def children(self) -> Iterator[Tuple[str, "Module"]]:
        for name, value in vars(self).items():
            if isinstance(value, Module):
                yield name, value

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Parameter]]:
        for name, value in vars(self).items():
            path = f"{prefix}{name}"
            if isinstance(value, Parameter):
                yield path, value
            elif isinstance(value, Module):
                yield from value.named_parameters(prefix=f"{path}.")

    def parameters(self) -> List[Parameter]:
        return [p for _, p in self.named_parameters()]

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def assign_names(self, prefix: str = "") -> "Module":
        """Write each parameter's dotted path into Parameter.name."""
        for path, p in self.named_parameters(prefix=prefix):
            p.name = path
        return self

    def initialize(self, seed: int, prefix: str = "") -> "Module":
        """Deterministically initialize every layer reachable from this module."""
        for name, child in self.children():
            child.initialize(seed, prefix=f"{prefix}{name}.")
        return self

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {path: p.data.copy() for path, p in self.named_parameters()}

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        own = dict(self.named_parameters())
        missing = sorted(set(own) - set(state))
        unexpected = sorted(set(state) - set(own))
        if missing or unexpected:
            raise CheckpointError(f"state mismatch: missing {missing}, unexpected {unexpected}")
        for path, p in own.items():
            value = np.asarray(state[path])
            if value.size != p.size:
                raise CheckpointError(f"{path}: expected {p.shape}, got {value.shape}")
            p.data = value.reshape(p.shape).astype(p.dtype)

    def astype(self, dtype: Union[str, np.dtype]) -> "Module":
        """Deep copy of this module with every parameter cast to dtype."""
        target = resolve_dtype(dtype)
        clone = copy.deepcopy(self)
        for p in clone.parameters():
            p.data = p.data.astype(target)
            p.grad = None
        return clone

    @property
    def dtype(self) -> np.dtype:
        params = self.parameters()
        return params[0].dtype if params else resolve_dtype(None)

    def profile(self, input_shape: Shape, prefix: str = "") -> Tuple[Shape, List[MacRow]]:
        raise NotImplementedError(f"{type(self).__name__} does not implement profile")


class StageList(Module):
    """Numbered container: children are exposed as stage1..stageN."""

    def __init__(self, stages: Sequence[Module]):
        for k, stage in enumerate(stages, start=1):
            setattr(self, f"stage{k}", stage)

    def __len__(self) -> int:
        return sum(1 for _ in self.children())

    def __getitem__(self, k: int) -> Module:
        """1-based access: stages[1] is stage1."""
        return getattr(self, f"stage{k}")

    def forward(self, *args, **kwargs):
        raise TypeError("StageList is a container; call its stages directly")
