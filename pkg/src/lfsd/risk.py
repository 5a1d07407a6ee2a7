"""Identity-disclosure risk metrics.

A synthetic record looks risky when its quasi-identifier combination is
(near-)unique in the synthetic data. Risky records are classified against
the original:

    replicated unique    combination unique in synth AND unique in original
    unique in original   combination unique in synth, present in original
                         (a superset of replicated uniques)

Key matching renders cells canonically at the column's released precision;
missing is a distinct key value, since an attacker can observe absence.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .dataset import Dataset, render_cell
from .errors import KeyAfterAffixMismatch, UnknownKeyColumn
from .schema import AffixRule, TableSchema

PrecisionMap = dict[str, int | str | None]


@dataclass(frozen=True)
class KeySpec:
    """Ordered quasi-identifier columns assumed knowable by an attacker,
    in original naming."""

    columns: tuple[str, ...]
    coarsening_notes: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        if not self.columns:
            raise ValueError("key spec must name at least one column")


@dataclass
class RiskReport:
    n_synth: int
    n_synth_unique: int
    n_replicated_unique: int
    n_unique_in_original: int
    synth_unique_rows: tuple[int, ...]
    replicated_unique_rows: tuple[int, ...]
    unique_in_original_rows: tuple[int, ...]
    synth_count_threshold: int = 1
    keys: tuple[str, ...] = ()

    def __post_init__(self):
        assert self.n_replicated_unique <= self.n_unique_in_original <= self.n_synth_unique <= self.n_synth

    @property
    def p_synth_unique(self) -> float:
        return self.n_synth_unique / self.n_synth if self.n_synth else 0.0

    @property
    def p_replicated_unique(self) -> float:
        return self.n_replicated_unique / self.n_synth if self.n_synth else 0.0

    @property
    def p_unique_in_original(self) -> float:
        return self.n_unique_in_original / self.n_synth if self.n_synth else 0.0

    def flagged(self, which: str) -> tuple[int, ...]:
        return {
            "synth_unique": self.synth_unique_rows,
            "replicated_unique": self.replicated_unique_rows,
            "unique_in_original": self.unique_in_original_rows,
        }[which]

    def to_dict(self) -> dict:
        return {
            "n_synth": self.n_synth,
            "keys": list(self.keys),
            "synth_count_threshold": self.synth_count_threshold,
            "n_synth_unique": self.n_synth_unique,
            "n_replicated_unique": self.n_replicated_unique,
            "n_unique_in_original": self.n_unique_in_original,
            "p_synth_unique": self.p_synth_unique,
            "p_replicated_unique": self.p_replicated_unique,
            "p_unique_in_original": self.p_unique_in_original,
            "synth_unique_rows": list(self.synth_unique_rows),
            "replicated_unique_rows": list(self.replicated_unique_rows),
            "unique_in_original_rows": list(self.unique_in_original_rows),
        }


def _resolve_key_columns(data: Dataset, keys: KeySpec, affix: AffixRule | None) -> list[str]:
    resolved = []
    for k in keys.columns:
        if k in data.cells:
            resolved.append(k)
        elif affix is not None and affix.apply(k) in data.cells:
            resolved.append(affix.apply(k))
        else:
            raise UnknownKeyColumn(f"key column {k!r} not found in dataset")
    return resolved


def key_tuple(
    data: Dataset,
    row: int,
    columns: list[str],
    keys: KeySpec,
    precision: PrecisionMap | None,
) -> tuple[str, ...]:
    out = []
    for bare, col in zip(keys.columns, columns):
        p = precision.get(bare) if precision else None
        out.append(render_cell(data.cells[col][row], p))
    return tuple(out)


def count_key_combos(
    data: Dataset,
    keys: KeySpec,
    affix: AffixRule | None = None,
    precision: PrecisionMap | None = None,
) -> Counter:
    """Tally of canonical key tuples; counts sum to the row count."""
    cols = _resolve_key_columns(data, keys, affix)
    tally: Counter = Counter()
    for i in range(data.n_rows):
        tally[key_tuple(data, i, cols, keys, precision)] += 1
    return tally


def classify_risky_records(
    synth: Dataset,
    original: Dataset,
    keys: KeySpec,
    synth_count_threshold: int = 1,
    affix: AffixRule | None = None,
    precision: PrecisionMap | None = None,
) -> RiskReport:
    """Classify synthetic records by key-combination uniqueness.

    A record is candidate-risky when its synthetic key count is at or below
    the threshold (1 = uniques; 3 admits the near-unique alternative).
    ``precision`` renders both sides at released precision, so a precision
    mitigation changes match semantics consistently.
    """
    if synth_count_threshold < 1:
        raise ValueError("synth_count_threshold must be >= 1")
    for k in keys.columns:
        if k not in original.cells:
            raise UnknownKeyColumn(f"key column {k!r} not found in original")
    try:
        synth_cols = _resolve_key_columns(synth, keys, affix)
    except UnknownKeyColumn as exc:
        raise KeyAfterAffixMismatch(str(exc)) from exc

    synth_counts = count_key_combos(synth, keys, affix, precision)
    orig_counts = count_key_combos(original, keys, None, precision)

    synth_unique, replicated, in_original = [], [], []
    for i in range(synth.n_rows):
        t = key_tuple(synth, i, synth_cols, keys, precision)
        if synth_counts[t] > synth_count_threshold:
            continue
        synth_unique.append(i)
        oc = orig_counts.get(t, 0)
        if oc >= 1:
            in_original.append(i)
        if oc == 1:
            replicated.append(i)
    return RiskReport(
        n_synth=synth.n_rows,
        n_synth_unique=len(synth_unique),
        n_replicated_unique=len(replicated),
        n_unique_in_original=len(in_original),
        synth_unique_rows=tuple(synth_unique),
        replicated_unique_rows=tuple(replicated),
        unique_in_original_rows=tuple(in_original),
        synth_count_threshold=synth_count_threshold,
        keys=keys.columns,
    )


def detect_singleton_values(
    original: Dataset,
    schema: TableSchema,
    rarity_threshold: int = 5,
) -> list[tuple[str, str, int]]:
    """Values identifying on their own: rare categories, and rare range
    endpoints of numeric/date columns (the values a metadata range exposes).

    Returns (column, rendered value, original count) triples.
    """
    findings = []
    for spec in schema.columns:
        if spec.name not in original.cells:
            continue
        counts = Counter(
            render_cell(c) for c in original.column(spec.name) if c is not None
        )
        if not counts:
            continue
        if spec.kind == "categorical":
            for value in counts:  # insertion order: first appearance
                if counts[value] < rarity_threshold:
                    findings.append((spec.name, value, counts[value]))
        else:
            present = [c for c in original.column(spec.name) if c is not None]
            endpoints = []
            lo, hi = min(present), max(present)
            endpoints.append(render_cell(lo))
            if hi != lo:
                endpoints.append(render_cell(hi))
            for value in endpoints:
                if counts[value] < rarity_threshold:
                    findings.append((spec.name, value, counts[value]))
    return findings
