"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the library's own counting paths:
risk classification is re-derived by O(n^2) pairwise comparison, and
distribution distances by direct summation.
"""

from __future__ import annotations

import random
from decimal import Decimal

import pytest

from lfsd.dataset import Dataset, render_cell
from lfsd.risk import KeySpec


def render_tuple(data: Dataset, row: int, keys, precision=None) -> tuple:
    out = []
    for k in keys:
        p = precision.get(k) if precision else None
        out.append(render_cell(data.cells[k][row], p))
    return tuple(out)


def brute_force_classify(synth: Dataset, original: Dataset, keys, threshold=1):
    """O(n^2) reference classifier: every synth row scans both tables."""
    synth_unique, replicated, in_original = [], [], []
    for i in range(synth.n_rows):
        t = render_tuple(synth, i, keys)
        synth_count = sum(
            1 for j in range(synth.n_rows) if render_tuple(synth, j, keys) == t
        )
        if synth_count > threshold:
            continue
        synth_unique.append(i)
        orig_count = sum(
            1 for j in range(original.n_rows) if render_tuple(original, j, keys) == t
        )
        if orig_count >= 1:
            in_original.append(i)
        if orig_count == 1:
            replicated.append(i)
    return synth_unique, replicated, in_original


def random_table(rng: random.Random, n_rows: int, spec: list[tuple[str, str, int]]) -> Dataset:
    """spec entries: (name, kind, cardinality-ish parameter)."""
    cols = {}
    for name, kind, card in spec:
        if kind == "cat":
            labels = [f"c{i}" for i in range(card)]
            cols[name] = [rng.choice(labels) for _ in range(n_rows)]
        else:
            cols[name] = [Decimal(rng.randrange(card)) for _ in range(n_rows)]
    return Dataset([s[0] for s in spec], cols)


def make_benign_original(n=200, seed=0) -> Dataset:
    """Coarse keys, no rare values, one column with missing cells; a
    from-margins sample of this passes every release check."""
    rng = random.Random(seed)
    return Dataset(
        ["sex", "area", "score"],
        {
            "sex": [rng.choice("MF") for _ in range(n)],
            "area": [rng.choice(["N", "S", "E", "W"]) for _ in range(n)],
            "score": [None if rng.random() < 0.2 else Decimal(rng.choice([10, 20, 30, 40, 50]))
                      for _ in range(n)],
        },
    )


def make_identifying_original(n=200, seed=0) -> Dataset:
    """A unique per-row numeric key: resampling it replicates uniques."""
    rng = random.Random(seed)
    return Dataset(
        ["pid", "sex"],
        {
            "pid": [Decimal(i) for i in range(n)],
            "sex": [rng.choice("MF") for _ in range(n)],
        },
    )


def write_config(path, **doc):
    import yaml

    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(doc, fh, sort_keys=False)
    return path


@pytest.fixture
def simple_original():
    return Dataset(
        ["sex", "area", "age"],
        {
            "sex": ["M", "F"] * 50,
            "area": (["N", "S", "E", "W"] * 25),
            "age": [Decimal(20 + (i % 10)) for i in range(100)],
        },
    )


@pytest.fixture
def keys_sex_area():
    return KeySpec(("sex", "area"))
