"""
JSON input and output: fan files, serialized complexes and chain maps, reports.

Bidegrees are written doubled and coefficients as exact "p/q" strings, so a
file round-trips without loss.
"""

from __future__ import annotations

import hashlib
import json
import logging
from fractions import Fraction
from pathlib import Path

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from config import FORMAT_VERSION, RAY_LABEL_SEPARATOR, ZERO_CONE_LABEL
from dcat import ChainMap, InjComplex
from exactlin import RationalSubspace
from exceptions import FanError, FanFileError, KoszulFanError
from fan import Completion, QuasiFan, make_cone, orthogonal_completion
from models import Report, Summand

logger = logging.getLogger(__name__)


# ============================================================================
# FAN FILES
# ============================================================================


class CompletionEntry(BaseModel):
    """Phi for one cone: the cone by its generators, the subspace of V* by a basis."""

    cone: list[list[int]]
    basis: list[list[int | str]]


class FanFile(BaseModel):
    """A fan in the standard lattice Z^n, given by its top cones."""

    ambient_dim: int = Field(gt=0)
    cones: list[list[list[int]]]
    completion: list[CompletionEntry] | None = None
    name: str = ""

    @field_validator("cones")
    @classmethod
    def _non_empty(cls, value: list[list[list[int]]]) -> list[list[list[int]]]:
        if not value:
            raise ValueError("a fan needs at least one cone")
        return value

    @model_validator(mode="after")
    def _lengths(self) -> FanFile:
        n = self.ambient_dim
        for k, gens in enumerate(self.cones):
            for g in gens:
                if len(g) != n:
                    raise ValueError(f"cone {k}: generator {g} does not have length {n}")
        for entry in self.completion or []:
            for vector in entry.cone + entry.basis:
                if len(vector) != n:
                    raise ValueError(f"completion entry for {entry.cone}: vector {vector} does not have length {n}")
        return self


def _decode(text: str, source: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FanFileError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise FanFileError(f"{source}: expected a JSON object at the top level")
    return data


def _completion(fan: QuasiFan, entries: list[CompletionEntry]) -> Completion:
    phi = {}
    for entry in entries:
        cone = make_cone(entry.cone, fan.ambient_dim)
        if cone not in fan:
            raise FanFileError(f"completion names a cone {entry.cone} that is not in the fan")
        basis = [[Fraction(x) for x in vector] for vector in entry.basis]
        phi[cone] = RationalSubspace.span(basis, fan.ambient_dim)
    for sigma in fan:
        if sigma.is_zero:
            phi.setdefault(sigma, RationalSubspace.zero(fan.ambient_dim))
        elif sigma not in phi:
            raise FanFileError(f"completion has no subspace for cone {fan.label(sigma)}")
    return Completion(fan.ambient_dim, phi)


def parse_fan(text: str, source: str = "<fan>") -> tuple[QuasiFan, Completion]:
    """
    Parse a fan file into a quasifan and a validated completion.

    Without an explicit completion the orthogonal one is used.

    Raises:
        FanFileError: on malformed JSON, schema violations, or geometric errors
    """
    data = _decode(text, source)
    try:
        parsed = FanFile.model_validate(data)
    except ValidationError as exc:
        raise FanFileError(f"{source}: {exc}") from exc
    name = parsed.name or Path(source).stem
    try:
        fan = QuasiFan.from_cones(parsed.cones, parsed.ambient_dim, name=name)
        completion = orthogonal_completion(fan) if parsed.completion is None else _completion(fan, parsed.completion)
        completion.validate(fan)
    except FanFileError:
        raise
    except FanError as exc:
        raise FanFileError(f"{source}: {exc}") from exc
    logger.info("loaded fan %r from %s", name, source)
    return fan, completion


def load_fan(path: str | Path) -> tuple[QuasiFan, Completion]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FanFileError(f"cannot read {path}: {exc}") from exc
    return parse_fan(text, str(path))


def fan_to_dict(fan: QuasiFan, completion: Completion | None = None) -> dict:
    """Fan file for a quasifan given by its maximal cones."""
    maximal = [c for c in fan if not fan.covers(c)]
    data: dict = {
        "ambient_dim": fan.ambient_dim,
        "cones": [[list(g) for g in c.generators] for c in maximal],
        "name": fan.name,
    }
    if completion is not None:
        data["completion"] = [
            {"cone": [list(g) for g in c.generators], "basis": [[str(x) for x in row] for row in completion[c].basis]}
            for c in fan
            if not c.is_zero
        ]
    return data


def input_sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ============================================================================
# COMPLEXES AND CHAIN MAPS
# ============================================================================


def _entries_to_list(entries: dict) -> list:
    return [
        [s, t, [[list(m), str(c)] for m, c in sorted(entry.items())]]
        for (s, t), entry in sorted(entries.items())
    ]


def _entries_from_list(rows: list, where: str) -> dict:
    entries = {}
    try:
        for s, t, terms in rows:
            entries[(int(s), int(t))] = {tuple(int(k) for k in m): Fraction(c) for m, c in terms}
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise FanFileError(f"{where}: malformed entry list ({exc})") from exc
    return entries


def complex_to_dict(S: InjComplex) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "ambient_dim": S.fan.ambient_dim,
        "rays": [list(r) for r in S.fan.rays],
        "summands": [[S.fan.label(s.cone), s.u, s.v] for s in S.summands],
        "entries": _entries_to_list(S.entries),
    }


def complex_from_dict(data: dict, fan: QuasiFan, completion: Completion) -> InjComplex:
    """
    Rebuild a complex over a fan; cone labels are read against the fan's rays.

    Raises:
        FanFileError: if the rays disagree, a label is unknown, or the complex is malformed
    """
    try:
        rays = tuple(tuple(int(x) for x in r) for r in data["rays"])
        rows = data["summands"]
        entry_rows = data.get("entries", [])
        ambient_dim = int(data["ambient_dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FanFileError(f"complex file is missing or mangles a field: {exc}") from exc
    if ambient_dim != fan.ambient_dim or not set(rays) <= set(fan.rays):
        raise FanFileError("complex file was written for a different fan")
    try:
        summands = []
        for label, u, v in rows:
            if label == ZERO_CONE_LABEL:
                cone = fan.cone(label)
            else:
                generators = [rays[int(k)] for k in str(label).split(RAY_LABEL_SEPARATOR)]
                cone = make_cone(generators, fan.ambient_dim)
            summands.append(Summand(cone, int(u), int(v)))
        return InjComplex(fan, completion, summands, _entries_from_list(entry_rows, "complex"))
    except (IndexError, ValueError) as exc:
        raise FanFileError(f"complex file has a bad summand: {exc}") from exc
    except KoszulFanError as exc:
        raise FanFileError(f"complex file does not describe a valid complex: {exc}") from exc


def load_complex(path: str | Path, fan: QuasiFan, completion: Completion) -> InjComplex:
    path = Path(path)
    return complex_from_dict(_decode(path.read_text(encoding="utf-8"), str(path)), fan, completion)


def chain_map_to_dict(f: ChainMap) -> dict:
    return {
        "source": complex_to_dict(f.source),
        "target": complex_to_dict(f.target),
        "entries": _entries_to_list(f.entries),
    }


# ============================================================================
# REPORTS
# ============================================================================


def report_to_dict(report: Report) -> dict:
    data = report.model_dump(mode="json")
    if report.timing_seconds is None:
        data.pop("timing_seconds")
    data["passed"] = report.passed
    return data


def dump_report(report: Report) -> str:
    """Report as JSON with sorted keys; identical inputs give identical bytes."""
    return json.dumps(report_to_dict(report), sort_keys=True, indent=2) + "\n"
