"""Command-line entry point.

Exit codes: 0 = all checks pass, 1 = usage/IO/config error, 2 = one or
more checks fail. LFSD_NO_COLOR disables styled terminal output.
"""

from __future__ import annotations

import os
import sys

import click

from .config import PipelineConfig, load_config
from .dataset import read_csv
from .errors import ConfigError, LfsdError
from .fidelity import fidelity_table
from .pipeline import ensure_synthetic_token, risk_only, run_all
from .reporting import atomic_write_text, dump_structured
from .schema import AffixRule, infer_schema, mark_synthetic, write_schema
from .synthesis import SynthesisConfig, synthesize

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CHECK_FAILED = 2


def _styled(text: str, **kwargs) -> str:
    if os.environ.get("LFSD_NO_COLOR"):
        return text
    return click.style(text, **kwargs)


def _fail(exc: Exception) -> "click.exceptions.Exit":
    click.echo(_styled(f"error: {exc}", fg="red"), err=True)
    sys.exit(EXIT_ERROR)


@click.group()
def main():
    """Low-fidelity synthetic data: generation, risk analysis, and the
    four release checks."""


@main.command()
@click.option("--data", required=True, type=click.Path(), help="CSV to profile.")
@click.option("--out", required=True, type=click.Path(), help="Schema file to write.")
@click.option("--missing-token", default="", help="Sentinel for missing cells.")
def infer(data, out, missing_token):
    """Infer a schema from a CSV file."""
    try:
        dataset = read_csv(data, missing_token)
        schema = infer_schema(dataset, source_reference=str(data))
        write_schema(schema, out)
    except (LfsdError, OSError) as exc:
        _fail(exc)
    click.echo(f"schema written to {out}")


def _load(config_path) -> PipelineConfig:
    try:
        return load_config(config_path)
    except ConfigError as exc:
        click.echo(_styled("configuration problems:", fg="red"), err=True)
        for problem in exc.problems:
            click.echo(f"  - {problem}", err=True)
        sys.exit(EXIT_ERROR)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="Pipeline config file.")
@click.option("--data", type=click.Path(), help="Original CSV (flag-only mode).")
@click.option("--metadata", type=click.Path(), help="Authored schema file (flag-only mode).")
@click.option("--out", type=click.Path(), help="Output directory.")
@click.option("--method", type=click.Choice(["metadata", "margins"]), default="margins")
@click.option("--n", "n_synth", type=int, default=None, help="Synthetic rows.")
@click.option("--seed", type=int, default=0)
@click.option("--affix", default="synth_")
@click.option("--missing-token", default="")
def synth(config_path, data, metadata, out, method, n_synth, seed, affix, missing_token):
    """Generate a synthetic CSV plus its banner-carrying schema."""
    try:
        if config_path:
            config = _load(config_path)
            if config.synthesis is None:
                raise ConfigError(["config has no synthesis block"])
            original = read_csv(config.original_data, config.missing_token) \
                if config.original_data else None
            schema = None
            if config.original_metadata:
                from .schema import read_schema
                schema, _ = read_schema(config.original_metadata)
            if schema is None and original is not None:
                schema = infer_schema(original, config.original_data)
            dataset = synthesize(config.synthesis, schema=schema, original=original)
            out_dir = config.output_dir
            reference = config.original_metadata or config.original_data
            stem = os.path.splitext(os.path.basename(reference))[0]
            token = config.policy.required_filename_token
            missing = config.missing_token
        else:
            if data is None and metadata is None:
                raise ConfigError(["give --config, or --data/--metadata"])
            if method == "margins" and data is None:
                raise ConfigError(["--method margins requires --data"])
            original = read_csv(data, missing_token) if data else None
            if metadata:
                from .schema import read_schema
                schema, _ = read_schema(metadata)
            else:
                schema = infer_schema(original, str(data))
            if n_synth is None:
                n_synth = original.n_rows if original is not None else schema.row_count or 100
            synth_config = SynthesisConfig(
                method=f"from_{method}", n_synth=n_synth, seed=seed,
                affix=AffixRule("suffix", affix) if affix.startswith("_")
                else AffixRule("prefix", affix),
            )
            dataset = synthesize(synth_config, schema=schema, original=original)
            out_dir = out or "."
            reference = metadata or data
            stem = os.path.splitext(os.path.basename(reference))[0]
            token = "synthetic"
            missing = missing_token
        os.makedirs(out_dir, exist_ok=True)
        csv_path = os.path.join(out_dir, ensure_synthetic_token(f"{stem}.csv", token))
        from .dataset import write_csv
        write_csv(dataset, csv_path, missing)
        synth_schema = mark_synthetic(infer_schema(dataset), str(reference))
        schema_path = os.path.splitext(csv_path)[0] + ".schema.yaml"
        write_schema(synth_schema, schema_path)
    except ConfigError as exc:
        click.echo(_styled("configuration problems:", fg="red"), err=True)
        for problem in exc.problems:
            click.echo(f"  - {problem}", err=True)
        sys.exit(EXIT_ERROR)
    except (LfsdError, OSError) as exc:
        _fail(exc)
    click.echo(f"synthetic data written to {csv_path}")
    click.echo(f"schema written to {schema_path}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path(), help="Risk report path (YAML).")
def risk(config_path, out):
    """Classify risky synthetic records against the original."""
    config = _load(config_path)
    try:
        report = risk_only(config)
    except (LfsdError, OSError) as exc:
        _fail(exc)
    text = dump_structured(report.to_dict())
    if out:
        atomic_write_text(out, text)
        click.echo(f"risk report written to {out}")
    else:
        click.echo(text)


def _run_checks(config_path) -> int:
    config = _load(config_path)
    try:
        report, paths = run_all(config)
    except ConfigError as exc:
        click.echo(_styled("configuration problems:", fg="red"), err=True)
        for problem in exc.problems:
            click.echo(f"  - {problem}", err=True)
        return EXIT_ERROR
    except (LfsdError, OSError) as exc:
        click.echo(_styled(f"error: {exc}", fg="red"), err=True)
        return EXIT_ERROR
    for check_id, outcome in report.outcomes.items():
        color = "green" if outcome.verdict == "pass" else "red"
        click.echo(f"{check_id:14s} {_styled(outcome.verdict.upper(), fg=color)}")
    click.echo(f"overall        "
               f"{_styled(report.overall_verdict.upper(), fg='green' if report.overall_verdict == 'pass' else 'red', bold=True)}")
    for kind, path in paths.items():
        click.echo(f"{kind}: {path}")
    return EXIT_OK if report.overall_verdict == "pass" else EXIT_CHECK_FAILED


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
def check(config_path):
    """Run the four release checks on existing synthetic data."""
    sys.exit(_run_checks(config_path))


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
def pipeline(config_path):
    """Synthesize, mitigate, check, and report in one run."""
    sys.exit(_run_checks(config_path))


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path(), help="Fidelity report path (YAML).")
@click.option("--bins", type=int, default=10, show_default=True)
def fidelity(config_path, out, bins):
    """Standalone margin-fidelity report (TVD per shared column)."""
    config = _load(config_path)
    try:
        if config.original_data is None:
            raise ConfigError(["fidelity needs original_data"])
        original = read_csv(config.original_data, config.missing_token)
        if config.synthetic_data:
            synth_data = read_csv(config.synthetic_data, config.missing_token)
        elif config.synthesis is not None:
            synth_data = synthesize(config.synthesis,
                                    schema=infer_schema(original), original=original)
        else:
            raise ConfigError(["fidelity needs synthetic_data or a synthesis block"])
        affix = config.policy.affix
        shared = [c for c in original.columns
                  if affix.apply(c) in synth_data.cells or c in synth_data.cells]
        table = fidelity_table(original, synth_data, shared, bins, affix)
    except ConfigError as exc:
        for problem in exc.problems:
            click.echo(f"  - {problem}", err=True)
        sys.exit(EXIT_ERROR)
    except (LfsdError, OSError) as exc:
        _fail(exc)
    doc = {"fidelity": [m.to_dict() for m in table]}
    if out:
        atomic_write_text(out, dump_structured(doc))
        click.echo(f"fidelity report written to {out}")
    else:
        click.echo(dump_structured(doc))


if __name__ == "__main__":
    main()
