# superdec/repositories/base.py
"""
Repository Pattern Implementation

Separates file persistence from the training and analysis logic. Every
repository is rooted at one directory and owns the layout beneath it.
"""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Generic, List, TypeVar, Union

ItemType = TypeVar("ItemType")


class BaseRepository(ABC, Generic[ItemType]):
    """
    Abstract base repository over a directory.

    Subclasses define how one item is written under a name and read back.
    """

    def __init__(self, root: Union[str, Path]):
        """
        Initialize repository with its root directory.

        Args:
            root: Directory holding the repository's items (created on demand)
        """
        self.root = Path(root)

    def path_for(self, name: str) -> Path:
        return self.root / name

    def exists(self, name: str) -> bool:
        return self.path_for(name).exists()

    def list_names(self) -> List[str]:
        """Names of the entries directly under the root, sorted."""
        if not self.root.is_dir():
            return []
        return sorted(p.name for p in self.root.iterdir())

    @abstractmethod
    def save(self, name: str, item: ItemType) -> Path:
        """
        Persist an item.

        Args:
            name: Entry name relative to the root
            item: Item to write

        Returns:
            Path written
        """
        pass

    @abstractmethod
    def load(self, name: str) -> ItemType:
        pass
