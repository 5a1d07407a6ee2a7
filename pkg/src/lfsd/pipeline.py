"""End-to-end orchestration: synthesize (or load), mitigate, run the four
checks, and write every release artifact."""

from __future__ import annotations

import os
from dataclasses import replace

from . import sdc
from .checks import (
    DocBundle,
    FullReport,
    check_disclosure,
    check_disclosure_metadata_only,
    check_documentation,
    check_labelling,
    check_structure,
    generate_documentation,
)
from .config import PipelineConfig
from .dataset import Dataset, read_csv, write_csv
from .errors import ConfigError
from .fidelity import fidelity_table
from .reporting import write_report
from .risk import classify_risky_records
from .schema import (
    SchemaDiff,
    TableSchema,
    diff_schemas,
    infer_schema,
    mark_synthetic,
    read_schema,
    write_schema,
)
from .synthesis import synthesize


def ensure_synthetic_token(filename: str, token: str = "synthetic") -> str:
    stem, ext = os.path.splitext(filename)
    if token.lower() not in stem.lower():
        stem = f"{stem}_{token}"
    return stem + ext


def _resolve_column(synth: Dataset, bare: str, affix) -> str:
    if bare in synth.cells:
        return bare
    affixed = affix.apply(bare)
    if affixed in synth.cells:
        return affixed
    raise ConfigError([f"mitigation targets unknown column {bare!r}"])


def apply_mitigations(
    synth: Dataset,
    synth_schema: TableSchema,
    config: PipelineConfig,
    original: Dataset | None,
):
    """Execute the declared mitigation list in order.

    Actions are recorded against bare (original) column names; a
    remove_records entry runs the remove/reclassify loop to fixpoint.
    Returns (synth, schema, trail, precision_map).
    """
    affix = config.policy.affix
    trail = []
    precision_map: dict = {}
    for decl in config.mitigations:
        kind = decl["kind"]
        if kind == "remove_records":
            if original is None or config.keys is None:
                raise ConfigError(["remove_records needs original_data and keys"])
            which = decl.get("class", config.policy.gating_class)
            synth, actions, _ = sdc.remove_records_to_fixpoint(
                synth, original, config.keys, which,
                config.policy.synth_count_threshold, affix, precision_map or None,
            )
            trail.extend(actions)
            synth_schema = replace(infer_schema(synth), is_synthetic=True,
                                   provenance=synth_schema.provenance,
                                   source_metadata_reference=synth_schema.source_metadata_reference)
            # re-apply precision set by earlier mitigations; reinference
            # cannot see a coarser declared unit
            for prev_bare, prec in precision_map.items():
                prev_col = _resolve_column(synth, prev_bare, affix)
                synth_schema = sdc._replace_spec(
                    synth_schema, replace(synth_schema.column(prev_col), precision=prec))
            continue
        bare = decl["column"]
        col = _resolve_column(synth, bare, affix)
        if kind == "reduce_precision":
            synth, synth_schema, action = sdc.reduce_precision(
                synth, synth_schema, col, decl.get("unit", decl.get("granularity")))
            precision_map[bare] = synth_schema.column(col).precision
        elif kind == "top_bottom_code":
            percentiles = None
            if "percentiles" in decl:
                percentiles = tuple(decl["percentiles"])
            elif "p_low" in decl or "p_high" in decl:
                percentiles = (decl.get("p_low", 1), decl.get("p_high", 99))
            synth, synth_schema, action = sdc.top_bottom_code(
                synth, synth_schema, col,
                percentiles=percentiles,
                count_threshold=decl.get("count_threshold"),
            )
        elif kind == "pool_categories":
            pool_source = None
            if original is not None and bare in original.cells:
                pool_source = original.rename_columns({bare: col}) if bare != col else original
            synth, synth_schema, action = sdc.pool_categories(
                synth, synth_schema, col,
                count_threshold=decl.get("count_threshold", 5),
                pooled_label=decl.get("pooled_label", "OTHER_POOLED"),
                original=pool_source,
            )
        elif kind == "coarsen_key":
            synth, synth_schema, action = sdc.coarsen_key(
                synth, synth_schema, col, dict(decl.get("mapping", {})))
        else:
            raise ConfigError([f"unknown mitigation kind {kind!r}"])
        if action.changed:
            trail.append(replace(action, columns=(bare,), applied_at=len(trail)))
    return synth, synth_schema, trail, precision_map


def run_all(config: PipelineConfig, write_outputs: bool = True) -> tuple[FullReport, dict]:
    """Run the whole protocol and return (FullReport, artifact paths).

    All four checks always run; a labelling failure never suppresses the
    disclosure analysis. Given a fixed seed the run is fully deterministic.
    """
    paths: dict = {}
    os.makedirs(config.output_dir, exist_ok=True)

    original = read_csv(config.original_data, config.missing_token) \
        if config.original_data else None
    if config.original_metadata:
        authored_schema, _ = read_schema(config.original_metadata)
    else:
        authored_schema = None
    original_schema = infer_schema(original) if original is not None else authored_schema
    metadata_reference = config.original_metadata or config.original_data

    # --- obtain synthetic data -------------------------------------------
    generated = False
    if config.synthetic_data:
        synth = read_csv(config.synthetic_data, config.missing_token)
        synth_path = config.synthetic_data
        schema_header_line = None
        if config.synthetic_schema:
            synth_schema, banner = read_schema(config.synthetic_schema)
            schema_header_line = "" if not banner else f"# {_banner()}"
        else:
            synth_schema = infer_schema(synth)
            schema_header_line = ""
    elif config.synthesis is not None:
        schema_for_synth = authored_schema if config.synthesis.method == "from_metadata" \
            else original_schema
        if schema_for_synth is None:
            schema_for_synth = original_schema
        synth = synthesize(config.synthesis, schema=schema_for_synth, original=original)
        synth_schema = mark_synthetic(infer_schema(synth), metadata_reference)
        generated = True
        stem = os.path.splitext(os.path.basename(
            config.original_data or config.original_metadata or "data"))[0]
        if stem.endswith((".schema", "_schema")):
            stem = stem.rsplit(".", 1)[0].rsplit("_", 1)[0]
        synth_path = os.path.join(
            config.output_dir, ensure_synthetic_token(f"{stem}.csv",
                                                      config.policy.required_filename_token))
        schema_header_line = None
    else:
        raise ConfigError(["either synthetic_data or a synthesis block is required"])

    # --- mitigations -------------------------------------------------------
    synth, synth_schema, trail, precision_map = apply_mitigations(
        synth, synth_schema, config, original)

    if generated:
        synth_schema = mark_synthetic(synth_schema, metadata_reference)
        write_csv(synth, synth_path, config.missing_token)
        schema_path = os.path.splitext(synth_path)[0] + ".schema.yaml"
        write_schema(synth_schema, schema_path)
        with open(schema_path, encoding="utf-8") as fh:
            schema_header_line = fh.readline().rstrip("\n")
        paths["synthetic_data"] = synth_path
        paths["synthetic_schema"] = schema_path

    # --- the four checks ---------------------------------------------------
    labelling = check_labelling(synth_path, synth_schema, config.policy, schema_header_line)

    if original is not None and config.keys is not None:
        disclosure, risk_report, singletons = check_disclosure(
            synth, original, config.keys, config.policy, original_schema,
            trail, precision_map or None)
        key_matching = True
    else:
        disclosure, risk_report, singletons = check_disclosure_metadata_only(
            original_schema, config.policy, trail)
        key_matching = False

    structure = check_structure(
        original_schema, synth_schema, synth, config.policy, trail)

    method = config.synthesis.method if config.synthesis else "from_margins"
    try:
        schema_diff = diff_schemas(original_schema, synth_schema, config.policy.affix)
    except Exception:
        schema_diff = SchemaDiff()  # structural failure already reported by check 3
    draft = any(o.verdict == "fail" for o in (labelling, disclosure, structure))
    doc_bundle: DocBundle = generate_documentation(
        config.summary(), schema_diff, trail, method, metadata_reference, draft=draft)
    documentation = check_documentation(doc_bundle)

    fidelity = []
    if original is not None:
        shared = [c for c in original.columns
                  if config.policy.affix.apply(c) in synth.cells or c in synth.cells]
        fidelity = fidelity_table(original, synth, shared, affix=config.policy.affix)

    report = FullReport(
        outcomes={
            "labelling": labelling,
            "disclosure": disclosure,
            "structure": structure,
            "documentation": documentation,
        },
        risk_report=risk_report,
        singletons=singletons,
        doc_bundle=doc_bundle,
        policy=config.policy,
        trail=trail,
        fidelity=fidelity,
        key_matching_evaluated=key_matching,
    )
    if write_outputs:
        paths.update(write_report(report, config.output_dir, config.report_formats))
    return report, paths


def _banner() -> str:
    from .schema import SYNTHETIC_BANNER
    return SYNTHETIC_BANNER


def risk_only(config: PipelineConfig):
    """Classification without checks; used by the risk subcommand."""
    if config.original_data is None or config.keys is None:
        raise ConfigError(["risk analysis needs original_data and keys"])
    original = read_csv(config.original_data, config.missing_token)
    if config.synthetic_data:
        synth = read_csv(config.synthetic_data, config.missing_token)
    elif config.synthesis is not None:
        synth = synthesize(config.synthesis,
                           schema=infer_schema(original), original=original)
    else:
        raise ConfigError(["risk analysis needs synthetic_data or a synthesis block"])
    return classify_risky_records(
        synth, original, config.keys,
        config.policy.synth_count_threshold, config.policy.affix)
