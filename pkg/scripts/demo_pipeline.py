"""End-to-end demo: build a small confidential-looking table, run the full
release pipeline twice (once clean, once with a deliberately identifying
key), and print where each run's artifacts landed.

Usage: python3 scripts/demo_pipeline.py [workdir]
"""

import random
import sys
from decimal import Decimal
from pathlib import Path

import yaml

from lfsd.config import load_config
from lfsd.dataset import Dataset, write_csv
from lfsd.pipeline import run_all


def build_original(n=500, seed=2024) -> Dataset:
    rng = random.Random(seed)
    return Dataset(
        ["sex", "region", "age_band", "income"],
        {
            "sex": [rng.choice("MF") for _ in range(n)],
            "region": [rng.choice(["North", "South", "East", "West"]) for _ in range(n)],
            "age_band": [rng.choice(["0-15", "16-39", "40-64", "65+"]) for _ in range(n)],
            "income": [None if rng.random() < 0.1
                       else Decimal(rng.randrange(10, 120) * 500)
                       for _ in range(n)],
        },
    )


def run(workdir: Path, name: str, doc: dict):
    config_path = workdir / f"{name}.yaml"
    with open(config_path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(doc, fh, sort_keys=False)
    report, paths = run_all(load_config(config_path))
    print(f"== {name}: overall {report.overall_verdict.upper()}")
    for check_id, outcome in report.outcomes.items():
        print(f"   {check_id:14s} {outcome.verdict}")
        for finding in outcome.findings:
            print(f"      [{finding.severity}] {finding.code}: {finding.message[:90]}")
    for kind, path in paths.items():
        print(f"   {kind}: {path}")
    print()


def main():
    workdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo_output")
    workdir.mkdir(parents=True, exist_ok=True)
    write_csv(build_original(), workdir / "survey.csv")

    run(workdir, "clean_release", {
        "original_data": "survey.csv",
        "output_dir": "clean",
        "synthesis": {"method": "margins", "n_synth": 500, "seed": 42},
        "keys": ["sex", "region", "age_band"],
        "mitigations": [
            {"kind": "reduce_precision", "column": "income", "unit": 1000},
        ],
    })

    # income joins the key set at full precision: expect a disclosure failure
    run(workdir, "risky_release", {
        "original_data": "survey.csv",
        "output_dir": "risky",
        "synthesis": {"method": "margins", "n_synth": 500, "seed": 42},
        "keys": ["sex", "region", "age_band", "income"],
    })


if __name__ == "__main__":
    main()
