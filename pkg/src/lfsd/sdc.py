"""Statistical disclosure control mitigations.

Each operation returns the modified dataset, the updated schema, and a
machine-readable MitigationAction for the documentation audit trail.
All operations are pure; the trail is assembled by the caller in pipeline
order.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace
from .dataset import (
    Dataset,
    GRANULARITIES,
    as_decimal,
    decimal_places,
    render_cell,
    round_to_unit,
    truncate_date,
)
from .errors import (
    InvalidPercentiles,
    MitigationLoopExceeded,
    NotCategorical,
    NotNumericOrDate,
    PartialMapping,
    PooledLabelCollision,
    StaleReport,
)
from .risk import KeySpec, RiskReport, classify_risky_records
from .schema import AffixRule, ColumnSpec, TableSchema

# remove/reclassify loops cannot diverge (row count strictly decreases) but a
# bound caps degenerate churn with an explicit failure
MAX_REMOVE_ITERATIONS = 10


@dataclass(frozen=True)
class MitigationAction:
    kind: str  # reduce_precision | top_bottom_code | pool_categories |
               # remove_records | coarsen_key
    columns: tuple[str, ...]
    params: dict = field(default_factory=dict)
    applied_at: int | None = None
    changed: bool = True

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "columns": list(self.columns),
            "params": self.params,
            "applied_at": self.applied_at,
            "changed": self.changed,
        }


def _find_spec(schema: TableSchema, column: str) -> ColumnSpec:
    if not schema.has_column(column):
        raise KeyError(f"column {column!r} not in schema")
    return schema.column(column)


def _replace_spec(schema: TableSchema, new_spec: ColumnSpec) -> TableSchema:
    cols = tuple(new_spec if c.name == new_spec.name else c for c in schema.columns)
    return replace(schema, columns=cols)


def _observed_range(cells):
    present = [c for c in cells if c is not None]
    return (min(present), max(present)) if present else None


def reduce_precision(
    data: Dataset,
    schema: TableSchema,
    column: str,
    unit,
) -> tuple[Dataset, TableSchema, MitigationAction]:
    """Round a numeric column to multiples of ``unit`` (half away from zero),
    or truncate a date column to the named granularity."""
    spec = _find_spec(schema, column)
    cells = data.column(column)
    if spec.kind == "date":
        if unit not in GRANULARITIES:
            raise NotNumericOrDate(f"{column}: date column needs a granularity, got {unit!r}")
        new_cells = [truncate_date(c, unit) if c is not None else None for c in cells]
        new_precision: int | str = unit
        params = {"granularity": unit}
    elif spec.kind == "numeric":
        unit_d = as_decimal(unit)
        if unit_d <= 0:
            raise NotNumericOrDate(f"{column}: unit must be positive")
        new_cells = [round_to_unit(c, unit_d) if c is not None else None for c in cells]
        exp = unit_d.normalize().as_tuple()
        if exp.digits == (1,):  # power of ten: precision is exactly -exponent
            new_precision = -exp.exponent
        else:
            new_precision = decimal_places(unit_d)
        params = {"unit": render_cell(unit_d)}
    else:
        raise NotNumericOrDate(f"{column}: precision reduction needs a numeric or date column")
    changed = new_cells != cells
    data2 = data.replace_column(column, new_cells)
    schema2 = _replace_spec(schema, replace(
        spec, precision=new_precision, numeric_range=_observed_range(new_cells) or spec.numeric_range,
    ))
    return data2, schema2, MitigationAction(
        kind="reduce_precision", columns=(column,), params=params, changed=changed,
    )


def _nearest_rank(sorted_values, p: float):
    n = len(sorted_values)
    rank = max(1, math.ceil(p / 100.0 * n))
    return sorted_values[min(rank, n) - 1]


def _count_threshold_cuts(sorted_values, t: int):
    """Collapse extremes inward until each tail holds at least t records."""
    counts = Counter(sorted_values)
    distinct = sorted(counts)
    # bottom cut
    acc = 0
    bottom = distinct[-1]
    for v in distinct:
        acc += counts[v]
        if acc >= t:
            bottom = v
            break
    # top cut
    acc = 0
    top = distinct[0]
    for v in reversed(distinct):
        acc += counts[v]
        if acc >= t:
            top = v
            break
    return bottom, top


def top_bottom_code(
    data: Dataset,
    schema: TableSchema,
    column: str,
    percentiles: tuple[float, float] | None = None,
    count_threshold: int | None = None,
) -> tuple[Dataset, TableSchema, MitigationAction]:
    """Collapse extreme values onto cut points.

    Percentile mode uses nearest-rank cuts; count-threshold mode moves the
    cuts inward until each collapsed tail holds at least the threshold
    number of records (the preferable variant for bottom coding).
    """
    spec = _find_spec(schema, column)
    if spec.kind not in ("numeric", "date"):
        raise NotNumericOrDate(f"{column}: top/bottom coding needs a numeric or date column")
    if (percentiles is None) == (count_threshold is None):
        raise ValueError("give exactly one of percentiles or count_threshold")
    cells = data.column(column)
    present = sorted(c for c in cells if c is not None)
    if not present:
        action = MitigationAction("top_bottom_code", (column,), {"mode": "noop"}, changed=False)
        return data, schema, action
    if percentiles is not None:
        p_low, p_high = percentiles
        if p_low >= p_high:
            raise InvalidPercentiles(f"p_low {p_low} must be below p_high {p_high}")
        bottom = _nearest_rank(present, p_low)
        top = _nearest_rank(present, p_high)
        params = {"mode": "percentile", "p_low": p_low, "p_high": p_high}
    else:
        bottom, top = _count_threshold_cuts(present, count_threshold)
        params = {"mode": "count_threshold", "threshold": count_threshold}
    if bottom > top:
        bottom = top
    new_cells = [min(max(c, bottom), top) if c is not None else None for c in cells]
    params["bottom_cut"] = render_cell(bottom)
    params["top_cut"] = render_cell(top)
    changed = new_cells != cells
    data2 = data.replace_column(column, new_cells)
    schema2 = _replace_spec(schema, replace(spec, numeric_range=(bottom, top)))
    return data2, schema2, MitigationAction(
        kind="top_bottom_code", columns=(column,), params=params, changed=changed,
    )


def pool_categories(
    data: Dataset,
    schema: TableSchema,
    column: str,
    count_threshold: int = 5,
    pooled_label: str = "OTHER_POOLED",
    original: Dataset | None = None,
) -> tuple[Dataset, TableSchema, MitigationAction]:
    """Relabel categories that are rare *in the original* into one pool.

    Counts come from the original dataset's margin (pass ``original`` when
    pooling synthetic data); categories unseen in the original count as 0.
    """
    spec = _find_spec(schema, column)
    if spec.kind != "categorical":
        raise NotCategorical(f"{column}: pooling needs a categorical column")
    if count_threshold < 1:
        raise ValueError("count_threshold must be >= 1")
    source = original if original is not None else data
    counts = Counter(c for c in source.column(column) if c is not None)
    if counts.get(pooled_label, 0) >= count_threshold:
        raise PooledLabelCollision(
            f"{column}: pooled label {pooled_label!r} is already a surviving category"
        )
    observed = list(dict.fromkeys(c for c in data.column(column) if c is not None))
    rare = {c for c in set(observed) | set(spec.categories) if counts.get(c, 0) < count_threshold}
    mapping = {c: pooled_label for c in rare if c != pooled_label}
    new_cells = [mapping.get(c, c) if c is not None else None for c in data.column(column)]
    data2 = data.replace_column(column, new_cells)
    new_categories = []
    for c in spec.categories:
        label = mapping.get(c, c)
        if label not in new_categories:
            new_categories.append(label)
    schema2 = _replace_spec(schema, replace(spec, categories=tuple(new_categories)))
    changed = bool(mapping) and new_cells != data.column(column)
    return data2, schema2, MitigationAction(
        kind="pool_categories", columns=(column,),
        params={"count_threshold": count_threshold, "pooled_label": pooled_label,
                "pooled": dict(sorted(mapping.items()))},
        changed=changed,
    )


def remove_records(
    synth: Dataset,
    report: RiskReport,
    which: str = "unique_in_original",
) -> tuple[Dataset, MitigationAction]:
    """Delete every synthetic row flagged in the chosen risky class."""
    if which not in ("replicated_unique", "unique_in_original"):
        raise ValueError(f"unknown risky class: {which!r}")
    if report.n_synth != synth.n_rows:
        raise StaleReport(
            f"report describes {report.n_synth} rows but dataset has {synth.n_rows}"
        )
    flagged = report.flagged(which)
    synth2 = synth.drop_rows(flagged) if flagged else synth
    return synth2, MitigationAction(
        kind="remove_records", columns=report.keys,
        params={"class": which, "removed_rows": list(flagged), "n_removed": len(flagged)},
        changed=bool(flagged),
    )


def remove_records_to_fixpoint(
    synth: Dataset,
    original: Dataset,
    keys: KeySpec,
    which: str = "unique_in_original",
    synth_count_threshold: int = 1,
    affix: AffixRule | None = None,
    precision=None,
) -> tuple[Dataset, list[MitigationAction], RiskReport]:
    """Iterate remove + reclassify until the chosen class is empty."""
    actions: list[MitigationAction] = []
    for _ in range(MAX_REMOVE_ITERATIONS):
        report = classify_risky_records(
            synth, original, keys, synth_count_threshold, affix, precision
        )
        if not report.flagged(which):
            return synth, actions, report
        synth, action = remove_records(synth, report, which)
        actions.append(action)
    raise MitigationLoopExceeded(
        f"risky records remain after {MAX_REMOVE_ITERATIONS} remove/reclassify iterations"
    )


def coarsen_key(
    data: Dataset,
    schema: TableSchema,
    column: str,
    mapping: dict[str, str],
) -> tuple[Dataset, TableSchema, MitigationAction]:
    """Replace a categorical key's labels by a coarser grouping
    (e.g. postcode -> local authority area)."""
    spec = _find_spec(schema, column)
    if spec.kind != "categorical":
        raise NotCategorical(f"{column}: key coarsening needs a categorical column")
    # labels already at the coarse level pass through, keeping the op idempotent
    effective = dict(mapping)
    for target in mapping.values():
        effective.setdefault(target, target)
    observed = set(c for c in data.column(column) if c is not None) | set(spec.categories)
    unmapped = sorted(observed - set(effective))
    if unmapped:
        raise PartialMapping(f"{column}: labels without a mapping: {unmapped}")
    new_cells = [effective[c] if c is not None else None for c in data.column(column)]
    data2 = data.replace_column(column, new_cells)
    new_categories = list(dict.fromkeys(effective[c] for c in spec.categories))
    schema2 = _replace_spec(schema, replace(spec, categories=tuple(new_categories)))
    changed = new_cells != data.column(column)
    return data2, schema2, MitigationAction(
        kind="coarsen_key", columns=(column,),
        params={"mapping": dict(sorted(mapping.items()))}, changed=changed,
    )
