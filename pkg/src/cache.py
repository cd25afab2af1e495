"""
Bounded memo tables for write-once algebraic data.
Wedge tables and pairing matrices never go stale, so entries only leave on overflow.
"""

from collections.abc import Callable, Hashable
from typing import Any, ClassVar, Generic, TypeVar

from settings import settings

T = TypeVar("T")


class MemoTable(Generic[T]):
    """
    Named dictionary of computed values keyed by the exact data they depend on.

    Keys are tuples of cones, subspaces and degrees, all hashable and compared
    exactly. When ``max_size`` entries are stored the oldest one is dropped.
    Every table registers itself in ``MemoTable.tables`` so the CLI can log
    hit rates after a run.
    """

    tables: ClassVar[list["MemoTable"]] = []

    def __init__(self, name: str, max_size: int | None = None):
        """
        Args:
            name: Label used in statistics
            max_size: Entry bound; ``settings.memo_max_size`` when omitted, 0 for unbounded
        """
        self.name = name
        self.max_size = max_size if max_size is not None else settings.memo_max_size
        self.table: dict[Hashable, T] = {}
        self.hits = 0
        self.misses = 0
        MemoTable.tables.append(self)

    def get(self, key: Hashable, loader_fn: Callable[[], T]) -> T:
        """Stored value for ``key``, computing it with ``loader_fn`` on a miss."""
        if key in self.table:
            self.hits += 1
            return self.table[key]

        self.misses += 1
        value = loader_fn()
        if self.max_size and len(self.table) >= self.max_size:
            del self.table[next(iter(self.table))]
        self.table[key] = value
        return value

    def clear(self):
        self.table.clear()
        self.hits = 0
        self.misses = 0

    def invalidate(self, key: Hashable | None = None):
        """Drop one key, or everything (statistics included) when ``key`` is None."""
        if key is None:
            self.clear()
        elif key in self.table:
            del self.table[key]

    def __len__(self) -> int:
        return len(self.table)

    @property
    def stats(self) -> dict[str, Any]:
        lookups = self.hits + self.misses
        rate = (self.hits / lookups * 100) if lookups > 0 else 0
        return {
            "name": self.name,
            "hits": self.hits,
            "misses": self.misses,
            "hit_rate": f"{rate:.1f}%",
            "size": len(self.table),
            "max_size": self.max_size,
        }
