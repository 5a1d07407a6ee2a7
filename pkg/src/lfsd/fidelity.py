"""Utility evidence: what the synthetic data does and does not preserve.

Total variation distance (TVD) is the comparison statistic throughout:
bounded in [0,1], zero iff the empirical distributions agree over the
shared support/bins, no minimum-count caveats on small fixtures.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from datetime import date
from decimal import Decimal

from .dataset import Dataset, MISSING_RENDER, render_cell
from .errors import UnknownColumn
from .schema import AffixRule

DEFAULT_BINS = 10


@dataclass(frozen=True)
class MarginComparison:
    column: str
    statistic: str  # "tvd_categorical" | "tvd_binned_numeric"
    value: float
    bins: int | None
    n_original: int
    n_synth: int

    def to_dict(self) -> dict:
        return {
            "column": self.column,
            "statistic": self.statistic,
            "value": self.value,
            "bins": self.bins,
            "n_original": self.n_original,
            "n_synth": self.n_synth,
        }


def _resolve(data: Dataset, column: str, affix: AffixRule | None) -> str:
    if column in data.cells:
        return column
    if affix is not None and affix.apply(column) in data.cells:
        return affix.apply(column)
    raise UnknownColumn(f"column {column!r} not found in dataset")


def _is_binnable(cells) -> bool:
    return any(isinstance(c, (Decimal, date)) for c in cells if c is not None)


def _to_number(cell):
    return float(cell.toordinal()) if isinstance(cell, date) else float(cell)


def _bin_cells(cells, lo: float, hi: float, bins: int) -> list[str]:
    """Bin numeric/date cells over a shared range; out-of-range values clamp
    into the edge bins, missing is its own cell."""
    width = (hi - lo) / bins if hi > lo else 0.0
    out = []
    for c in cells:
        if c is None:
            out.append(MISSING_RENDER)
            continue
        x = _to_number(c)
        if width == 0.0:
            out.append("bin0")
            continue
        idx = int((x - lo) / width)
        out.append(f"bin{min(max(idx, 0), bins - 1)}")
    return out


def _distribution(labels) -> dict[str, float]:
    counts = Counter(labels)
    total = sum(counts.values())
    return {k: v / total for k, v in counts.items()}


def tvd(p: dict[str, float], q: dict[str, float]) -> float:
    support = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in support)


def compare_margin(
    original: Dataset,
    synth: Dataset,
    column: str,
    bins: int = DEFAULT_BINS,
    affix: AffixRule | None = None,
) -> MarginComparison:
    """TVD between the original and synthetic margins of one column.

    Numeric/date columns share equal-width bins over the ORIGINAL observed
    range; categorical columns compare label frequencies directly.
    Symmetric in its two dataset arguments up to the binning range.
    """
    o_col = original.column(_resolve(original, column, affix))
    s_col = synth.column(_resolve(synth, column, affix))
    if _is_binnable(o_col) or _is_binnable(s_col):
        present = [_to_number(c) for c in o_col if c is not None]
        if not present:
            present = [_to_number(c) for c in s_col if c is not None]
        lo, hi = min(present), max(present)
        o_labels = _bin_cells(o_col, lo, hi, bins)
        s_labels = _bin_cells(s_col, lo, hi, bins)
        statistic = "tvd_binned_numeric"
        used_bins = bins
    else:
        o_labels = [render_cell(c) for c in o_col]
        s_labels = [render_cell(c) for c in s_col]
        statistic = "tvd_categorical"
        used_bins = None
    value = tvd(_distribution(o_labels), _distribution(s_labels))
    return MarginComparison(
        column=column, statistic=statistic, value=value, bins=used_bins,
        n_original=len(o_col), n_synth=len(s_col),
    )


def pairwise_association(
    data: Dataset,
    column_a: str,
    column_b: str,
    bins: int = DEFAULT_BINS,
) -> float:
    """TVD between the empirical joint distribution of two columns and the
    product of their empirical margins; 0 means exact empirical independence."""
    def labels_for(column: str) -> list[str]:
        col = data.column(_resolve(data, column, None))
        if _is_binnable(col):
            present = [_to_number(c) for c in col if c is not None]
            lo, hi = (min(present), max(present)) if present else (0.0, 0.0)
            return _bin_cells(col, lo, hi, bins)
        return [render_cell(c) for c in col]

    a = labels_for(column_a)
    b = labels_for(column_b)
    joint = _distribution(list(zip(a, b)))
    pa = _distribution(a)
    pb = _distribution(b)
    support = set(joint) | {(x, y) for x in pa for y in pb}
    return 0.5 * sum(
        abs(joint.get(k, 0.0) - pa[k[0]] * pb[k[1]]) for k in support
    )


def fidelity_table(
    original: Dataset,
    synth: Dataset,
    columns: list[str],
    bins: int = DEFAULT_BINS,
    affix: AffixRule | None = None,
) -> list[MarginComparison]:
    return [compare_margin(original, synth, c, bins, affix) for c in columns]
