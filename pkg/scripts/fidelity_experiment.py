"""Experiment: how margin fidelity and pairwise association scale with the
synthetic sample size, for both synthesis methods.

Resampled margins converge to the original margin at the usual 1/sqrt(n)
rate while pairwise associations stay near zero; metadata-only draws never
converge to a skewed margin. Prints one table per statistic.

Usage: python3 scripts/fidelity_experiment.py [--seeds 50]
"""

import argparse
import math
import random
from decimal import Decimal

from lfsd.dataset import Dataset
from lfsd.fidelity import compare_margin, pairwise_association
from lfsd.schema import AffixRule, infer_schema
from lfsd.synthesis import SynthesisConfig, synth_from_margins, synth_from_metadata

SIZES = (100, 400, 1600, 6400)


def build_original(n=800, seed=7) -> Dataset:
    rng = random.Random(seed)
    rows = []
    for _ in range(n):
        region = rng.choices(["North", "South", "East", "West"],
                             weights=[55, 25, 12, 8])[0]
        # income depends on region, so the pair carries real association
        base = {"North": 30, "South": 45, "East": 60, "West": 80}[region]
        rows.append((region, Decimal((base + rng.randrange(0, 40)) * 500)))
    return Dataset(["region", "income"],
                   {"region": [r[0] for r in rows], "income": [r[1] for r in rows]})


def mean(values):
    return sum(values) / len(values)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=50)
    args = parser.parse_args()

    original = build_original()
    schema = infer_schema(original)
    affix = AffixRule()

    print(f"{'n_synth':>8s} {'margins TVD':>12s} {'1/sqrt(n)':>10s} "
          f"{'metadata TVD':>13s} {'assoc (margins)':>16s}")
    for n in SIZES:
        margin_tvd, meta_tvd, assoc = [], [], []
        for seed in range(args.seeds):
            out = synth_from_margins(original, SynthesisConfig("from_margins", n, seed))
            margin_tvd.append(compare_margin(original, out, "region", affix=affix).value)
            assoc.append(pairwise_association(out, "synth_region", "synth_income"))
            meta = synth_from_metadata(schema, SynthesisConfig("from_metadata", n, seed))
            meta_tvd.append(compare_margin(original, meta, "region", affix=affix).value)
        print(f"{n:8d} {mean(margin_tvd):12.4f} {1 / math.sqrt(n):10.4f} "
              f"{mean(meta_tvd):13.4f} {mean(assoc):16.4f}")


if __name__ == "__main__":
    main()
