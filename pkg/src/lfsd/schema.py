"""Typed table descriptions: inference, validation, diffing, and file I/O.

The schema file is YAML with one header block and one block per column.
A schema describing a synthetic dataset starts with the literal banner
line (as a comment) so that any reader of the raw file sees it first.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import date
from decimal import Decimal
from typing import Optional

import yaml

from .dataset import (
    Dataset,
    GRANULARITIES,
    as_decimal,
    decimal_places,
    format_decimal,
    render_cell,
    truncate_date,
)
from .errors import (
    EmptyDataset,
    MixedKindColumn,
    SynthColumnNotInOriginal,
    UninferableColumn,
)

SYNTHETIC_BANNER = "SYNTHETIC DATA — NOT REAL RECORDS"

# float noise guard: precision inferred from data never exceeds this
MAX_INFERRED_PRECISION = 10


@dataclass(frozen=True)
class AffixRule:
    """Prefix or suffix marking synthetic column names (release check 1c)."""

    kind: str = "prefix"  # "prefix" | "suffix"
    text: str = "synth_"

    def __post_init__(self):
        if self.kind not in ("prefix", "suffix"):
            raise ValueError(f"affix kind must be prefix or suffix, got {self.kind!r}")
        if not self.text:
            raise ValueError("affix text must be non-empty")

    def apply(self, name: str) -> str:
        return self.text + name if self.kind == "prefix" else name + self.text

    def strip(self, name: str) -> Optional[str]:
        """Return the bare name, or None when the affix is absent."""
        if self.kind == "prefix":
            return name[len(self.text):] if name.startswith(self.text) else None
        return name[: -len(self.text)] if name.endswith(self.text) else None


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str  # "categorical" | "numeric" | "date"
    categories: tuple[str, ...] = ()
    numeric_range: tuple | None = None  # (min, max): Decimals or dates
    precision: int | str | None = None  # decimal places (numeric, may be negative) or granularity (date)
    missing_allowed: bool = False
    missing_rate: float | None = None
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("categorical", "numeric", "date"):
            raise ValueError(f"unknown column kind: {self.kind!r}")
        if self.kind == "categorical":
            if not self.categories:
                raise ValueError(f"{self.name}: categorical column needs categories")
            if len(set(self.categories)) != len(self.categories):
                raise ValueError(f"{self.name}: duplicate categories")
        if self.kind == "date" and self.precision is not None and self.precision not in GRANULARITIES:
            raise ValueError(f"{self.name}: date precision must be one of {GRANULARITIES}")
        if self.numeric_range is not None:
            lo, hi = self.numeric_range
            if lo > hi:
                raise ValueError(f"{self.name}: range min > max")
        if self.missing_rate is not None:
            if not 0.0 <= self.missing_rate <= 1.0:
                raise ValueError(f"{self.name}: missing_rate outside [0,1]")
            if self.missing_rate > 0 and not self.missing_allowed:
                raise ValueError(f"{self.name}: missing_rate > 0 but missing_allowed is false")


@dataclass(frozen=True)
class TableSchema:
    columns: tuple[ColumnSpec, ...]
    row_count: int
    provenance: str  # "inferred_from_data" | "authored_metadata"
    is_synthetic: bool = False
    source_metadata_reference: str | None = None

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names in schema")
        if self.row_count < 0:
            raise ValueError("row_count must be non-negative")

    def column(self, name: str) -> ColumnSpec:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(name)

    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def has_column(self, name: str) -> bool:
        return any(c.name == name for c in self.columns)


@dataclass
class Violation:
    column: str
    row: int | None
    code: str
    message: str


@dataclass
class DiffEntry:
    column: str  # original-side name
    code: str    # missing_in_synth | pooled_categories | category_change |
                 # precision_change | range_change | missingness_mismatch
    detail: dict = field(default_factory=dict)


@dataclass
class SchemaDiff:
    """Structural differences between an original and a synthetic schema.

    ``renames`` records the affix mapping (synthetic name -> original name);
    it is bookkeeping, not a difference. The diff is empty iff the schemas
    are structurally identical after affix stripping.
    """

    renames: list = field(default_factory=list)
    entries: list = field(default_factory=list)

    def is_empty(self) -> bool:
        return not self.entries


def _cell_kind(cell) -> str:
    if isinstance(cell, Decimal):
        return "numeric"
    if isinstance(cell, date):
        return "date"
    return "categorical"


def infer_schema(data: Dataset, source_reference: str | None = None) -> TableSchema:
    """Infer a schema from typed data.

    Columns mixing numeric and non-numeric cells raise MixedKindColumn;
    date strings mixed with other labels are treated as categorical.
    """
    if not data.columns or data.n_rows == 0:
        raise EmptyDataset("cannot infer a schema from an empty dataset")
    specs = []
    for name in data.columns:
        cells = data.column(name)
        present = [c for c in cells if c is not None]
        if not present:
            raise UninferableColumn(f"{name}: all cells missing, kind cannot be inferred")
        kinds = {_cell_kind(c) for c in present}
        missing_rate = (len(cells) - len(present)) / len(cells)
        missing_allowed = missing_rate > 0
        if kinds == {"numeric"}:
            notes = ()
            prec = max(decimal_places(c) for c in present)
            if prec > MAX_INFERRED_PRECISION:
                prec = MAX_INFERRED_PRECISION
                notes = ("precision capped at 10 decimal places; review for float noise",)
            specs.append(ColumnSpec(
                name=name, kind="numeric",
                numeric_range=(min(present), max(present)),
                precision=prec, missing_allowed=missing_allowed,
                missing_rate=missing_rate, notes=notes,
            ))
        elif kinds == {"date"}:
            if all(c.month == 1 and c.day == 1 for c in present):
                gran = "year"
            elif all(c.day == 1 for c in present):
                gran = "month"
            else:
                gran = "day"
            specs.append(ColumnSpec(
                name=name, kind="date",
                numeric_range=(min(present), max(present)),
                precision=gran, missing_allowed=missing_allowed,
                missing_rate=missing_rate,
            ))
        elif "numeric" in kinds:
            raise MixedKindColumn(f"{name}: column mixes numeric and non-numeric cells")
        else:
            # pure labels, or labels mixed with date-shaped strings
            seen: dict[str, None] = {}
            for c in present:
                seen.setdefault(render_cell(c), None)
            specs.append(ColumnSpec(
                name=name, kind="categorical", categories=tuple(seen),
                missing_allowed=missing_allowed, missing_rate=missing_rate,
            ))
    return TableSchema(
        columns=tuple(specs), row_count=data.n_rows,
        provenance="inferred_from_data", is_synthetic=False,
        source_metadata_reference=source_reference,
    )


def _validate_cell(cell, spec: ColumnSpec, row: int, out: list[Violation]) -> None:
    if cell is None:
        if not spec.missing_allowed:
            out.append(Violation(spec.name, row, "MissingNotAllowed",
                                 "missing cell in a column where missing is not allowed"))
        return
    kind = _cell_kind(cell)
    if kind != spec.kind:
        out.append(Violation(spec.name, row, "WrongKind",
                             f"expected {spec.kind} cell, got {kind}"))
        return
    if spec.kind == "categorical":
        if cell not in spec.categories:
            out.append(Violation(spec.name, row, "UnknownCategory",
                                 f"label {cell!r} not in declared categories"))
    elif spec.kind == "numeric":
        if spec.numeric_range is not None:
            lo, hi = spec.numeric_range
            if cell < lo or cell > hi:
                out.append(Violation(spec.name, row, "OutOfRange",
                                     f"{format_decimal(cell)} outside [{format_decimal(as_decimal(lo))}, "
                                     f"{format_decimal(as_decimal(hi))}]"))
        if spec.precision is not None:
            if spec.precision >= 0:
                if decimal_places(cell) > spec.precision:
                    out.append(Violation(spec.name, row, "ExcessPrecision",
                                         f"{format_decimal(cell)} has more than {spec.precision} decimals"))
            else:
                unit = Decimal(1).scaleb(-spec.precision)
                if cell % unit != 0:
                    out.append(Violation(spec.name, row, "ExcessPrecision",
                                         f"{format_decimal(cell)} is not a multiple of {format_decimal(unit)}"))
    else:  # date
        if spec.numeric_range is not None:
            lo, hi = spec.numeric_range
            if cell < lo or cell > hi:
                out.append(Violation(spec.name, row, "OutOfRange",
                                     f"{cell.isoformat()} outside [{lo.isoformat()}, {hi.isoformat()}]"))
        if spec.precision is not None and truncate_date(cell, spec.precision) != cell:
            out.append(Violation(spec.name, row, "ExcessPrecision",
                                 f"{cell.isoformat()} finer than {spec.precision} granularity"))


def validate(data: Dataset, schema: TableSchema) -> list[Violation]:
    """Return every cell/column violating the schema; empty means conformant.

    Total: never raises on well-kinded data. Violations are data, not errors.
    """
    out: list[Violation] = []
    schema_names = set(schema.column_names())
    for name in data.columns:
        if name not in schema_names:
            out.append(Violation(name, None, "UnknownColumn", "column not in schema"))
    for spec in schema.columns:
        if spec.name not in data.cells:
            out.append(Violation(spec.name, None, "MissingColumn", "schema column absent from data"))
            continue
        for i, cell in enumerate(data.column(spec.name)):
            _validate_cell(cell, spec, i, out)
    return out


def _has_missing(spec: ColumnSpec) -> bool:
    if spec.missing_rate is not None:
        return spec.missing_rate > 0
    return spec.missing_allowed


def diff_schemas(original: TableSchema, synth: TableSchema, affix: AffixRule) -> SchemaDiff:
    """Structural diff used by the documentation check.

    Synthetic names are mapped back by stripping the affix. Columns present
    only in the original are permitted (the synthetic set must be a subset);
    a synthetic column with no original counterpart is an error.
    """
    diff = SchemaDiff()
    matched: dict[str, ColumnSpec] = {}
    for spec in synth.columns:
        bare = affix.strip(spec.name)
        lookup = bare if bare is not None else spec.name
        if not original.has_column(lookup):
            raise SynthColumnNotInOriginal(
                f"synthetic column {spec.name!r} has no counterpart {lookup!r} in the original"
            )
        if bare is not None:
            diff.renames.append((spec.name, bare))
        matched[lookup] = spec
    for orig in original.columns:
        if orig.name not in matched:
            diff.entries.append(DiffEntry(orig.name, "missing_in_synth"))
            continue
        syn = matched[orig.name]
        if orig.kind == "categorical" and syn.kind == "categorical":
            o_set, s_set = set(orig.categories), set(syn.categories)
            if o_set != s_set:
                absent = sorted(o_set - s_set)
                new = sorted(s_set - o_set)
                if len(new) == 1 and absent:
                    diff.entries.append(DiffEntry(
                        orig.name, "pooled_categories",
                        {"pooled": {a: new[0] for a in absent}, "pooled_label": new[0]},
                    ))
                else:
                    diff.entries.append(DiffEntry(
                        orig.name, "category_change",
                        {"only_in_original": absent, "only_in_synth": new},
                    ))
        if orig.precision != syn.precision:
            diff.entries.append(DiffEntry(
                orig.name, "precision_change",
                {"original": orig.precision, "synthetic": syn.precision},
            ))
        if orig.numeric_range is not None and syn.numeric_range is not None:
            if tuple(orig.numeric_range) != tuple(syn.numeric_range):
                diff.entries.append(DiffEntry(
                    orig.name, "range_change",
                    {"original": [render_cell(v) for v in orig.numeric_range],
                     "synthetic": [render_cell(v) for v in syn.numeric_range]},
                ))
        if _has_missing(orig) != _has_missing(syn):
            diff.entries.append(DiffEntry(
                orig.name, "missingness_mismatch",
                {"original_has_missing": _has_missing(orig),
                 "synthetic_has_missing": _has_missing(syn)},
            ))
    return diff


# --- file format ------------------------------------------------------------

def _range_to_plain(spec: ColumnSpec):
    if spec.numeric_range is None:
        return None
    lo, hi = spec.numeric_range
    return [render_cell(lo), render_cell(hi)]


def schema_to_dict(schema: TableSchema) -> dict:
    return {
        "header": {
            "is_synthetic": schema.is_synthetic,
            "provenance": schema.provenance,
            "row_count": schema.row_count,
            "source_metadata_reference": schema.source_metadata_reference,
        },
        "columns": [
            {
                "name": c.name,
                "kind": c.kind,
                "categories": list(c.categories) if c.kind == "categorical" else None,
                "numeric_range": _range_to_plain(c),
                "precision": c.precision,
                "missing_allowed": c.missing_allowed,
                "missing_rate": c.missing_rate,
                "notes": list(c.notes) or None,
            }
            for c in schema.columns
        ],
    }


def _parse_range(kind: str, raw):
    if raw is None:
        return None
    lo, hi = raw
    if kind == "date":
        return (date.fromisoformat(lo), date.fromisoformat(hi))
    return (Decimal(str(lo)), Decimal(str(hi)))


def schema_from_dict(doc: dict) -> TableSchema:
    header = doc["header"]
    cols = []
    for c in doc["columns"]:
        cols.append(ColumnSpec(
            name=c["name"],
            kind=c["kind"],
            categories=tuple(c["categories"] or ()) if c.get("categories") else (),
            numeric_range=_parse_range(c["kind"], c.get("numeric_range")),
            precision=c.get("precision"),
            missing_allowed=bool(c.get("missing_allowed", False)),
            missing_rate=c.get("missing_rate"),
            notes=tuple(c.get("notes") or ()),
        ))
    return TableSchema(
        columns=tuple(cols),
        row_count=int(header.get("row_count", 0)),
        provenance=header.get("provenance", "authored_metadata"),
        is_synthetic=bool(header.get("is_synthetic", False)),
        source_metadata_reference=header.get("source_metadata_reference"),
    )


def write_schema(schema: TableSchema, path) -> None:
    body = yaml.safe_dump(schema_to_dict(schema), sort_keys=False, allow_unicode=True)
    text = body
    if schema.is_synthetic:
        text = f"# {SYNTHETIC_BANNER}\n" + body
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def read_schema(path) -> tuple[TableSchema, bool]:
    """Load a schema file; the flag reports whether the banner line is present."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    first = text.splitlines()[0] if text else ""
    banner = SYNTHETIC_BANNER in first
    return schema_from_dict(yaml.safe_load(text)), banner


def mark_synthetic(schema: TableSchema, source_reference: str | None = None) -> TableSchema:
    return replace(
        schema, is_synthetic=True,
        source_metadata_reference=source_reference or schema.source_metadata_reference,
    )
