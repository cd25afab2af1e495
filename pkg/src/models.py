"""
Shared data structures using dataclasses and pydantic report models.
Bidegrees are stored doubled: (u, v) = (2i, 2j).
"""

from __future__ import annotations

from collections import defaultdict
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import pandas as pd
from pydantic import BaseModel, Field

from exceptions import ParityViolation
from fan import Cone


def half(value: int) -> Fraction:
    """Undo the doubling of a bidegree coordinate."""
    return Fraction(value, 2)


def format_half(value: int) -> str:
    x = half(value)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True, order=True)
class Bidegree:
    """Point of the half-integer lattice: (complex degree i, grading j) stored as (2i, 2j)."""

    u: int
    v: int

    def __post_init__(self):
        if (self.u - self.v) % 2:
            raise ParityViolation(f"bidegree ({format_half(self.u)}, {format_half(self.v)}) is not in the lattice")

    @classmethod
    def from_half(cls, i, j) -> Bidegree:
        u, v = Fraction(i) * 2, Fraction(j) * 2
        if u.denominator != 1 or v.denominator != 1:
            raise ParityViolation(f"({i}, {j}) is not a half-integer pair")
        return cls(int(u), int(v))

    @property
    def i(self) -> Fraction:
        return half(self.u)

    @property
    def j(self) -> Fraction:
        return half(self.v)

    @property
    def level(self) -> int:
        """u + v = 2(i + j), the quantity compared against -2 codim in perversity tests."""
        return self.u + self.v

    def __str__(self) -> str:
        return f"({format_half(self.u)}, {format_half(self.v)})"


@dataclass(frozen=True)
class Summand:
    """J_cone placed in complex degree u/2 with its generator in grading v/2."""

    cone: Cone
    u: int
    v: int

    def __post_init__(self):
        if (self.u - self.v) % 2:
            raise ParityViolation(f"summand at ({format_half(self.u)}, {format_half(self.v)}) is not in the lattice")

    @property
    def bidegree(self) -> Bidegree:
        return Bidegree(self.u, self.v)

    @property
    def key(self) -> tuple:
        return (self.cone.sort_key, self.u, self.v)

    def shifted(self, ku: int, kv: int) -> Summand:
        return Summand(self.cone, self.u - ku, self.v - kv)


@dataclass(frozen=True)
class BigradedDims:
    """Finitely supported table of dimensions indexed by doubled bidegrees."""

    entries: tuple[tuple[tuple[int, int], int], ...] = ()

    @classmethod
    def from_counts(cls, counts: Mapping[tuple[int, int], int]) -> BigradedDims:
        return cls(tuple(sorted((key, dim) for key, dim in counts.items() if dim)))

    @cached_property
    def table(self) -> dict[tuple[int, int], int]:
        return dict(self.entries)

    def __getitem__(self, key: tuple[int, int]) -> int:
        return self.table.get(tuple(key), 0)

    def at(self, i, j) -> int:
        """Dimension at an ordinary (half-integer) bidegree."""
        b = Bidegree.from_half(i, j)
        return self[(b.u, b.v)]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def total(self) -> int:
        return sum(dim for _, dim in self.entries)

    @property
    def is_zero(self) -> bool:
        return not self.entries

    @property
    def is_diagonal(self) -> bool:
        return all(u == v for (u, v), _ in self.entries)

    def shifted(self, ku: int, kv: int) -> BigradedDims:
        return BigradedDims.from_counts({(u - ku, v - kv): d for (u, v), d in self.entries})

    def restricted(self, keep) -> BigradedDims:
        return BigradedDims.from_counts({key: d for key, d in self.entries if keep(*key)})

    def __add__(self, other: BigradedDims) -> BigradedDims:
        total: dict[tuple[int, int], int] = defaultdict(int)
        for key, d in self.entries + other.entries:
            total[key] += d
        return BigradedDims.from_counts(total)

    def to_frame(self) -> pd.DataFrame:
        """Pivot table: rows complex degree i, columns grading j."""
        if not self.entries:
            return pd.DataFrame()
        records = [{"i": format_half(u), "j": format_half(v), "dim": d, "_u": u, "_v": v} for (u, v), d in self.entries]
        frame = pd.DataFrame(records)
        rows = [format_half(u) for u in sorted({u for (u, _), _ in self.entries})]
        cols = [format_half(v) for v in sorted({v for (_, v), _ in self.entries})]
        pivot = frame.pivot_table(index="i", columns="j", values="dim", aggfunc="sum", fill_value=0)
        return pivot.reindex(index=rows, columns=cols, fill_value=0)

    def to_rows(self) -> list[list[int]]:
        return [[u, v, d] for (u, v), d in self.entries]


@dataclass(frozen=True)
class GradedDims:
    """Finitely supported table of dimensions indexed by integer degrees."""

    entries: tuple[tuple[int, int], ...] = ()

    @classmethod
    def from_counts(cls, counts: Mapping[int, int]) -> GradedDims:
        return cls(tuple(sorted((k, d) for k, d in counts.items() if d)))

    @classmethod
    def from_degrees(cls, degrees: Iterable[int]) -> GradedDims:
        counts: dict[int, int] = defaultdict(int)
        for k in degrees:
            counts[k] += 1
        return cls.from_counts(counts)

    @cached_property
    def table(self) -> dict[int, int]:
        return dict(self.entries)

    def __getitem__(self, degree: int) -> int:
        return self.table.get(degree, 0)

    @property
    def total(self) -> int:
        return sum(d for _, d in self.entries)

    @property
    def degrees(self) -> list[int]:
        return [k for k, _ in self.entries]


@dataclass
class TraceStep:
    """One extension or hull step of a construction."""

    cone: str
    kept: BigradedDims
    summands: int


@dataclass
class ConstructionTrace:
    """Cone order and per-step data of a simple-object or injective-hull construction."""

    kind: str
    cone_order: list[str] = field(default_factory=list)
    steps: list[TraceStep] = field(default_factory=list)
    costandard_layers: list[tuple[str, int, int]] = field(default_factory=list)

    def record(self, cone: str, kept: BigradedDims, summands: int) -> None:
        self.cone_order.append(cone)
        self.steps.append(TraceStep(cone, kept, summands))

    @property
    def sizes(self) -> list[int]:
        return [step.summands for step in self.steps]


# ============================================================================
# REPORT MODELS
# ============================================================================


class CheckItem(BaseModel):
    """Pass/fail record of one machine check."""

    check: str
    subject: str
    passed: bool
    detail: str = ""
    data: dict = Field(default_factory=dict)


class Report(BaseModel):
    """Deterministic command report; timing only when requested."""

    command: list[str]
    input_sha256: str
    engine_version: str
    fan: str = ""
    items: list[CheckItem] = Field(default_factory=list)
    tables: dict = Field(default_factory=dict)
    witnesses: dict = Field(default_factory=dict)
    timing_seconds: float | None = None

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items)
