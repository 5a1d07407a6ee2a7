"""Columnar in-memory table with typed cells, plus CSV ingestion.

A cell is one of:
    None            missing
    str             categorical label
    Decimal         numeric (Decimal keeps the quoted precision, e.g. "12.50")
    datetime.date   date

CSV is the only serialization: comma-separated, first row headers,
RFC-4180 quoting, UTF-8, empty field = missing (a sentinel token such as
"NA" may be configured instead).
"""

from __future__ import annotations

import csv
import re
from datetime import date, timedelta
from decimal import Decimal, ROUND_CEILING, ROUND_FLOOR, ROUND_HALF_UP
from typing import Iterable, Mapping, Sequence

from .errors import CsvFormatError, EmptyDataset

Cell = None | str | Decimal | date

MISSING_RENDER = "<missing>"

_NUMBER_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)$")

GRANULARITIES = ("day", "month", "year")


def as_decimal(value) -> Decimal:
    """Coerce a python number to Decimal via its string form."""
    if isinstance(value, Decimal):
        return value
    return Decimal(str(value))


def decimal_places(value: Decimal) -> int:
    exp = value.as_tuple().exponent
    if not isinstance(exp, int):  # NaN/Inf never occur in parsed data
        return 0
    return max(0, -exp)


def quantize(value: Decimal, precision: int) -> Decimal:
    """Round to a multiple of 10**-precision, ties away from zero.

    Negative precision rounds to coarse units, e.g. precision -3 rounds to
    multiples of 1000.
    """
    unit = Decimal(1).scaleb(-precision)
    return value.quantize(unit, rounding=ROUND_HALF_UP)


def round_to_unit(value: Decimal, unit: Decimal) -> Decimal:
    """Round to the nearest multiple of an arbitrary positive unit, ties away from zero."""
    k = (value / unit).quantize(Decimal(1), rounding=ROUND_HALF_UP)
    return k * unit


def unit_floor(value: Decimal, unit: Decimal) -> int:
    return int((value / unit).to_integral_value(rounding=ROUND_FLOOR))


def unit_ceil(value: Decimal, unit: Decimal) -> int:
    return int((value / unit).to_integral_value(rounding=ROUND_CEILING))


def truncate_date(value: date, granularity: str) -> date:
    if granularity == "day":
        return value
    if granularity == "month":
        return value.replace(day=1)
    if granularity == "year":
        return value.replace(month=1, day=1)
    raise ValueError(f"unknown date granularity: {granularity!r}")


def date_to_days(value: date) -> int:
    """Days since 1970-01-01."""
    return value.toordinal() - date(1970, 1, 1).toordinal()


def days_to_date(days: int) -> date:
    return date(1970, 1, 1) + timedelta(days=int(days))


def format_decimal(value: Decimal) -> str:
    """Canonical value rendering: no exponent, no trailing zeros."""
    if value == 0:
        return "0"
    return format(value.normalize(), "f")


def render_cell(cell: Cell, precision: int | str | None = None) -> str:
    """Canonical string rendering of a cell, used for key matching.

    ``precision`` is decimal places for numeric cells (may be negative) or a
    granularity name for date cells; None renders the face value.
    """
    if cell is None:
        return MISSING_RENDER
    if isinstance(cell, date):
        if isinstance(precision, str):
            cell = truncate_date(cell, precision)
        return cell.isoformat()
    if isinstance(cell, Decimal):
        if isinstance(precision, int):
            cell = quantize(cell, precision)
        return format_decimal(cell)
    return str(cell)


def parse_cell(text: str, missing_token: str = "") -> Cell:
    if text == missing_token:
        return None
    if _NUMBER_RE.match(text):
        return Decimal(text)
    try:
        return date.fromisoformat(text)
    except ValueError:
        return text


def cell_to_text(cell: Cell, missing_token: str = "") -> str:
    if cell is None:
        return missing_token
    if isinstance(cell, date):
        return cell.isoformat()
    if isinstance(cell, Decimal):
        return format(cell, "f")
    return str(cell)


class Dataset:
    """Immutable-by-convention columnar table."""

    def __init__(self, columns: Sequence[str], cells: Mapping[str, Sequence]):
        columns = list(columns)
        if len(set(columns)) != len(columns):
            raise ValueError("duplicate column names")
        if set(columns) != set(cells):
            raise ValueError("columns and cell map disagree")
        norm: dict[str, list[Cell]] = {}
        n_rows = None
        for name in columns:
            col = [self._coerce(c) for c in cells[name]]
            if n_rows is None:
                n_rows = len(col)
            elif len(col) != n_rows:
                raise ValueError(f"column {name!r} has {len(col)} cells, expected {n_rows}")
            norm[name] = col
        self.columns = columns
        self.cells = norm
        self.n_rows = n_rows or 0

    @staticmethod
    def _coerce(cell) -> Cell:
        if cell is None or isinstance(cell, (str, Decimal, date)):
            return cell
        if isinstance(cell, (int, float)):
            return as_decimal(cell)
        raise TypeError(f"unsupported cell type: {type(cell).__name__}")

    def column(self, name: str) -> list[Cell]:
        return self.cells[name]

    def row(self, i: int) -> tuple[Cell, ...]:
        return tuple(self.cells[c][i] for c in self.columns)

    def rows(self) -> Iterable[tuple[Cell, ...]]:
        for i in range(self.n_rows):
            yield self.row(i)

    def rename_columns(self, mapping: Mapping[str, str]) -> "Dataset":
        cols = [mapping.get(c, c) for c in self.columns]
        return Dataset(cols, {mapping.get(c, c): self.cells[c] for c in self.columns})

    def take_rows(self, indices: Sequence[int]) -> "Dataset":
        return Dataset(self.columns, {c: [self.cells[c][i] for i in indices] for c in self.columns})

    def drop_rows(self, indices: Iterable[int]) -> "Dataset":
        drop = set(indices)
        keep = [i for i in range(self.n_rows) if i not in drop]
        return Dataset(self.columns, {c: [self.cells[c][i] for i in keep] for c in self.columns})

    def without_column(self, name: str) -> "Dataset":
        cols = [c for c in self.columns if c != name]
        return Dataset(cols, {c: self.cells[c] for c in cols})

    def with_column(self, name: str, values: Sequence, position: int | None = None) -> "Dataset":
        cols = list(self.columns)
        if position is None:
            cols.append(name)
        else:
            cols.insert(position, name)
        cells = dict(self.cells)
        cells[name] = list(values)
        return Dataset(cols, cells)

    def reorder(self, columns: Sequence[str]) -> "Dataset":
        if set(columns) != set(self.columns):
            raise ValueError("reorder must use the same column set")
        return Dataset(list(columns), self.cells)

    def replace_column(self, name: str, values: Sequence) -> "Dataset":
        cells = dict(self.cells)
        cells[name] = list(values)
        return Dataset(self.columns, cells)

    def __eq__(self, other):
        return (
            isinstance(other, Dataset)
            and self.columns == other.columns
            and self.cells == other.cells
        )

    def __repr__(self):
        return f"Dataset({self.n_rows} rows x {len(self.columns)} cols)"


def read_csv(path, missing_token: str = "") -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataset(f"{path}: file is empty")
        if len(set(header)) != len(header):
            raise CsvFormatError(f"{path}: duplicate column names in header")
        cols: dict[str, list[Cell]] = {name: [] for name in header}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise CsvFormatError(
                    f"{path}: row {lineno} has {len(row)} fields, expected {len(header)}"
                )
            for name, text in zip(header, row):
                cols[name].append(parse_cell(text, missing_token))
    if all(len(v) == 0 for v in cols.values()):
        raise EmptyDataset(f"{path}: no data rows")
    return Dataset(header, cols)


def write_csv(data: Dataset, path, missing_token: str = "") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(data.columns)
        for row in data.rows():
            writer.writerow([cell_to_text(c, missing_token) for c in row])
