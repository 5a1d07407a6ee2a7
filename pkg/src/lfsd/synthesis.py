"""Low-fidelity synthetic data generation.

Two methods:
    from_metadata   draw each column from its declared categories/ranges,
                    no access to the original data
    from_margins    independent bootstrap resampling of each original column

Neither preserves relationships between columns. The transform layer lets
designated logical consistencies (date ordering, additive totals) survive
independent resampling by synthesizing in a derived coordinate system and
inverting afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta
from decimal import Decimal
from typing import Sequence

import numpy as np

from .dataset import (
    Cell,
    Dataset,
    as_decimal,
    decimal_places,
    truncate_date,
    unit_ceil,
    unit_floor,
)
from .errors import (
    DegenerateRange,
    EmptyOriginal,
    MethodMismatch,
    TransformPreconditionViolated,
)
from .schema import AffixRule, ColumnSpec, TableSchema


@dataclass(frozen=True)
class DatePairTransform:
    """Replace (origin date, other date) with (origin date, duration in days).

    Resampling a non-negative duration pool forces other >= origin after
    inversion; resampling the two dates directly would not.
    """

    origin: str
    other: str
    duration_name: str
    kind: str = "date_pair_to_origin_plus_duration"


@dataclass(frozen=True)
class TotalTransform:
    """Drop a total column during synthesis and recompute it as the
    component sum on inversion."""

    total: str
    components: tuple[str, ...]
    kind: str = "total_to_components"

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))


TransformSpec = DatePairTransform | TotalTransform


@dataclass(frozen=True)
class SynthesisConfig:
    method: str  # "from_metadata" | "from_margins"
    n_synth: int
    seed: int
    affix: AffixRule = AffixRule()
    transforms: tuple = ()
    metadata_missing_rate: float = 0.05

    def __post_init__(self):
        if self.method not in ("from_metadata", "from_margins"):
            raise ValueError(f"unknown synthesis method: {self.method!r}")
        if self.n_synth < 1:
            raise ValueError("n_synth must be >= 1")
        if not 0.0 <= self.metadata_missing_rate <= 1.0:
            raise ValueError("metadata_missing_rate outside [0,1]")
        object.__setattr__(self, "transforms", tuple(self.transforms))


def _column_rng(seed: int, column_index: int) -> np.random.Generator:
    # keyed on (seed, column index) so adding a column never perturbs others
    return np.random.default_rng([seed, column_index])


# --- transform pipeline -----------------------------------------------------

def apply_transform_pipeline(original: Dataset, specs: Sequence[TransformSpec]) -> Dataset:
    """Forward direction: validate invariants on the original, then rewrite.

    Violating rows abort with TransformPreconditionViolated; confidential
    data is never silently repaired.
    """
    data = original
    for spec in specs:
        if isinstance(spec, DatePairTransform):
            origins = data.column(spec.origin)
            others = data.column(spec.other)
            bad = [
                i for i, (a, b) in enumerate(zip(origins, others))
                if a is not None and b is not None and b < a
            ]
            if bad:
                raise TransformPreconditionViolated(
                    f"{spec.other!r} precedes {spec.origin!r} on rows {bad[:20]}"
                    + ("..." if len(bad) > 20 else ""),
                    rows=bad,
                )
            durations = [
                Decimal((b - a).days) if a is not None and b is not None else None
                for a, b in zip(origins, others)
            ]
            pos = data.columns.index(spec.other)
            data = data.without_column(spec.other).with_column(spec.duration_name, durations, pos)
        elif isinstance(spec, TotalTransform):
            comps = [data.column(c) for c in spec.components]
            totals = data.column(spec.total)
            bad = []
            for i, t in enumerate(totals):
                parts = [col[i] for col in comps]
                if t is None or any(p is None for p in parts):
                    continue
                tol = Decimal(1).scaleb(-max(decimal_places(t), *(decimal_places(p) for p in parts))) / 2
                if abs(t - sum(parts)) > tol:
                    bad.append(i)
            if bad:
                raise TransformPreconditionViolated(
                    f"{spec.total!r} is not the sum of {spec.components} on rows {bad[:20]}"
                    + ("..." if len(bad) > 20 else ""),
                    rows=bad,
                )
            data = data.without_column(spec.total)
        else:
            raise TypeError(f"unknown transform: {spec!r}")
    return data


def invert_transform_pipeline(
    synth: Dataset,
    specs: Sequence[TransformSpec],
    column_order: Sequence[str] | None = None,
) -> Dataset:
    """Inverse direction: reconstruct derived columns on synthetic data."""
    data = synth
    for spec in reversed(list(specs)):
        if isinstance(spec, DatePairTransform):
            origins = data.column(spec.origin)
            durations = data.column(spec.duration_name)
            others = [
                a + timedelta(days=int(d)) if a is not None and d is not None else None
                for a, d in zip(origins, durations)
            ]
            pos = data.columns.index(spec.duration_name)
            data = data.without_column(spec.duration_name).with_column(spec.other, others, pos)
        elif isinstance(spec, TotalTransform):
            comps = [data.column(c) for c in spec.components]
            totals = [
                sum(parts) if all(p is not None for p in parts) else None
                for parts in zip(*comps)
            ]
            data = data.with_column(spec.total, totals)
        else:
            raise TypeError(f"unknown transform: {spec!r}")
    if column_order is not None:
        data = data.reorder(column_order)
    return data


def transform_schema_columns(
    schema: TableSchema, specs: Sequence[TransformSpec]
) -> list[ColumnSpec]:
    """Column specs for the transformed coordinate system of an authored schema.

    Metadata alone cannot encode a duration pool, so a date-pair transform is
    only usable under from_metadata when the schema author supplies a spec
    for the duration column.
    """
    cols = {c.name: c for c in schema.columns}
    order = [c.name for c in schema.columns]
    for spec in specs:
        if isinstance(spec, DatePairTransform):
            if spec.duration_name not in cols:
                raise TransformPreconditionViolated(
                    f"metadata-only synthesis needs an authored spec for duration "
                    f"column {spec.duration_name!r}"
                )
            if spec.other in cols:
                i = order.index(spec.other)
                order.remove(spec.other)
                order.remove(spec.duration_name)
                order.insert(i, spec.duration_name)
                del cols[spec.other]
        elif isinstance(spec, TotalTransform):
            if spec.total in cols:
                order.remove(spec.total)
                del cols[spec.total]
    return [cols[n] for n in order]


# --- from metadata ----------------------------------------------------------

def _generate_numeric(spec: ColumnSpec, n: int, rng: np.random.Generator) -> list[Cell]:
    lo, hi = (as_decimal(v) for v in spec.numeric_range)
    if lo > hi:
        raise DegenerateRange(f"{spec.name}: range min > max")
    prec = spec.precision if isinstance(spec.precision, int) else 0
    unit = Decimal(1).scaleb(-prec)
    k_lo, k_hi = unit_ceil(lo, unit), unit_floor(hi, unit)
    if k_lo > k_hi:
        raise DegenerateRange(
            f"{spec.name}: no value at precision {prec} inside the declared range"
        )
    ks = rng.integers(k_lo, k_hi + 1, size=n)
    return [Decimal(int(k)).scaleb(-prec) for k in ks]


def _generate_date(spec: ColumnSpec, n: int, rng: np.random.Generator) -> list[Cell]:
    lo, hi = spec.numeric_range
    if lo > hi:
        raise DegenerateRange(f"{spec.name}: range min > max")
    gran = spec.precision or "day"
    if gran == "day":
        ords = rng.integers(lo.toordinal(), hi.toordinal() + 1, size=n)
        return [date.fromordinal(int(o)) for o in ords]
    # uniform over the distinct truncated periods covered by the range
    periods = []
    cur = truncate_date(lo, gran)
    if cur < lo:
        if gran == "year":
            cur = cur.replace(year=cur.year + 1)
        else:
            cur = (cur.replace(day=28) + timedelta(days=4)).replace(day=1)
    while cur <= hi:
        periods.append(cur)
        if gran == "year":
            cur = cur.replace(year=cur.year + 1)
        else:
            cur = (cur.replace(day=28) + timedelta(days=4)).replace(day=1)
    if not periods:
        raise DegenerateRange(f"{spec.name}: no {gran} start inside the declared range")
    idx = rng.integers(0, len(periods), size=n)
    return [periods[int(i)] for i in idx]


def synth_from_metadata(schema: TableSchema, config: SynthesisConfig) -> Dataset:
    """Generate rows from declared metadata alone ("dummy data").

    Uniform draws over categories/ranges at the declared precision; columns
    that allow missing get independent missing cells at the configured rate.
    """
    if config.method != "from_metadata":
        raise MethodMismatch(f"config.method is {config.method!r}, expected from_metadata")
    specs = transform_schema_columns(schema, config.transforms)
    n = config.n_synth
    cols: dict[str, list[Cell]] = {}
    for idx, spec in enumerate(specs):
        rng = _column_rng(config.seed, idx)
        if spec.kind == "categorical":
            picks = rng.integers(0, len(spec.categories), size=n)
            values: list[Cell] = [spec.categories[int(i)] for i in picks]
        elif spec.kind == "numeric":
            values = _generate_numeric(spec, n, rng)
        else:
            values = _generate_date(spec, n, rng)
        if spec.missing_allowed and config.metadata_missing_rate > 0:
            mask = rng.random(n) < config.metadata_missing_rate
            values = [None if m else v for v, m in zip(values, mask)]
        cols[spec.name] = values
    data = Dataset([s.name for s in specs], cols)
    data = invert_transform_pipeline(data, config.transforms)
    # authored helper columns (e.g. a duration spec) are not emitted
    order = [n for n in schema.column_names() if n in set(data.columns)]
    data = data.reorder(order) if set(order) == set(data.columns) else data
    return data.rename_columns({c: config.affix.apply(c) for c in data.columns})


# --- from margins -----------------------------------------------------------

@dataclass(frozen=True)
class MarginalDistribution:
    """A column's empirical margin: the original cells, missing included
    as an explicit pseudo-value, so missing rates survive resampling."""

    column: str
    pool: tuple = ()

    @classmethod
    def from_column(cls, data: Dataset, column: str) -> "MarginalDistribution":
        return cls(column=column, pool=tuple(data.column(column)))

    def sample(self, n: int, rng: np.random.Generator) -> list[Cell]:
        idx = rng.integers(0, len(self.pool), size=n)
        return [self.pool[int(i)] for i in idx]


def synth_from_margins(original: Dataset, config: SynthesisConfig) -> Dataset:
    """Independent per-column bootstrap of the original's margins.

    Each column draws from its own RNG stream, so margins are preserved in
    expectation and every inter-column relationship is destroyed.
    """
    if config.method != "from_margins":
        raise MethodMismatch(f"config.method is {config.method!r}, expected from_margins")
    if not original.columns or original.n_rows == 0:
        raise EmptyOriginal("original dataset has no rows")
    working = apply_transform_pipeline(original, config.transforms)
    n = config.n_synth
    cols = {}
    for idx, name in enumerate(working.columns):
        margin = MarginalDistribution.from_column(working, name)
        cols[name] = margin.sample(n, _column_rng(config.seed, idx))
    data = Dataset(list(working.columns), cols)
    data = invert_transform_pipeline(data, config.transforms, original.columns)
    return data.rename_columns({c: config.affix.apply(c) for c in data.columns})


def synthesize(
    config: SynthesisConfig,
    schema: TableSchema | None = None,
    original: Dataset | None = None,
) -> Dataset:
    if config.method == "from_metadata":
        if schema is None:
            raise MethodMismatch("from_metadata needs a schema")
        return synth_from_metadata(schema, config)
    if original is None:
        raise MethodMismatch("from_margins needs the original dataset")
    return synth_from_margins(original, config)
