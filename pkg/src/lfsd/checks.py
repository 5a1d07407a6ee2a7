"""The four release checks and their orchestration.

1. labelling      the synthetic data is unmistakably not the original
2. disclosure     risky records and singleton values are within policy
3. structure      the synthetic schema mirrors the original
4. documentation  differences and preserved relationships are written down

Every threshold is a policy field, surfaced in the report, because a strict
one-size-fits-all rule is explicitly not the goal: data holders own the
numbers for their release setting.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .dataset import Dataset
from .errors import MissingOriginalReference
from .fidelity import MarginComparison
from .risk import (
    KeySpec,
    PrecisionMap,
    RiskReport,
    classify_risky_records,
    detect_singleton_values,
)
from .schema import (
    AffixRule,
    SchemaDiff,
    SYNTHETIC_BANNER,
    TableSchema,
)
from .sdc import MitigationAction

FROM_MARGINS_STATEMENT = (
    "Only tables built from the synthetic data one variable at a time are "
    "expected to be similar to the same tables from the original data. No "
    "other tables or regression model results are expected to be similar."
)
FROM_METADATA_STATEMENT = (
    "No tables calculated from the synthetic data are expected to be similar "
    "to the same tables from the original data."
)


@dataclass
class Finding:
    severity: str  # "fail" | "warning" | "info"
    code: str
    message: str
    location: str = ""

    def to_dict(self) -> dict:
        return {"severity": self.severity, "code": self.code,
                "message": self.message, "location": self.location}


@dataclass
class CheckOutcome:
    check_id: str  # labelling | disclosure | structure | documentation
    findings: list[Finding] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "fail" if any(f.severity == "fail" for f in self.findings) else "pass"

    def to_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "verdict": self.verdict,
            "findings": [f.to_dict() for f in self.findings],
        }


@dataclass(frozen=True)
class ReleasePolicy:
    """Release gates. The proportion bounds are local policy, not values
    anyone has prescribed; they must be owned by the data controller."""

    max_replicated_unique_proportion: float = 0.0
    max_unique_in_original_proportion: float = 0.01
    gating_class: str = "unique_in_original"  # the wider, more cautious class
    synth_count_threshold: int = 1
    rarity_threshold: int = 5
    affix: AffixRule = AffixRule()
    required_filename_token: str = "synthetic"

    def __post_init__(self):
        for p in (self.max_replicated_unique_proportion, self.max_unique_in_original_proportion):
            if not 0.0 <= p <= 1.0:
                raise ValueError("policy proportions must lie in [0,1]")
        if self.max_replicated_unique_proportion > self.max_unique_in_original_proportion:
            raise ValueError("replicated bound must not exceed unique-in-original bound")
        if self.gating_class not in ("replicated_unique", "unique_in_original"):
            raise ValueError(f"unknown gating class: {self.gating_class!r}")

    def to_dict(self) -> dict:
        return {
            "max_replicated_unique_proportion": self.max_replicated_unique_proportion,
            "max_unique_in_original_proportion": self.max_unique_in_original_proportion,
            "gating_class": self.gating_class,
            "synth_count_threshold": self.synth_count_threshold,
            "rarity_threshold": self.rarity_threshold,
            "affix": {"kind": self.affix.kind, "text": self.affix.text},
            "required_filename_token": self.required_filename_token,
        }


@dataclass
class DocBundle:
    original_metadata_reference: str
    schema_diff: SchemaDiff
    trail: list[MitigationAction]
    expectation_statement: str
    method: str
    config_summary: dict = field(default_factory=dict)
    draft: bool = False

    def to_dict(self) -> dict:
        return {
            "original_metadata_reference": self.original_metadata_reference,
            "method": self.method,
            "expectation_statement": self.expectation_statement,
            "schema_differences": [
                {"column": e.column, "code": e.code, "detail": e.detail}
                for e in self.schema_diff.entries
            ],
            "column_renames": [list(r) for r in self.schema_diff.renames],
            "mitigation_trail": [a.to_dict() for a in self.trail],
            "config_summary": self.config_summary,
            "draft": self.draft,
        }


@dataclass
class FullReport:
    outcomes: dict[str, CheckOutcome]
    risk_report: RiskReport | None
    singletons: list
    doc_bundle: DocBundle | None
    policy: ReleasePolicy
    trail: list[MitigationAction]
    fidelity: list[MarginComparison] = field(default_factory=list)
    key_matching_evaluated: bool = True

    @property
    def overall_verdict(self) -> str:
        return "pass" if all(o.verdict == "pass" for o in self.outcomes.values()) else "fail"

    def to_dict(self) -> dict:
        return {
            "overall_verdict": self.overall_verdict,
            "labelling": self.outcomes["labelling"].to_dict(),
            "disclosure": self.outcomes["disclosure"].to_dict(),
            "structure": self.outcomes["structure"].to_dict(),
            "documentation": self.outcomes["documentation"].to_dict(),
            "risk": self.risk_report.to_dict() if self.risk_report else None,
            "key_matching_evaluated": self.key_matching_evaluated,
            "singleton_values": [
                {"column": c, "value": v, "count": n} for c, v, n in self.singletons
            ],
            "fidelity": [m.to_dict() for m in self.fidelity],
            "policy": self.policy.to_dict(),
            "trail": [a.to_dict() for a in self.trail],
            "documentation_bundle": self.doc_bundle.to_dict() if self.doc_bundle else None,
        }


# --- check 1: labelling -----------------------------------------------------

def check_labelling(
    dataset_path: str,
    synth_schema: TableSchema,
    policy: ReleasePolicy,
    schema_header_line: str | None = None,
) -> CheckOutcome:
    """The release must be unmistakably synthetic: schema banner, filename
    token, and an affix on every column name."""
    out = CheckOutcome("labelling")
    if not synth_schema.is_synthetic:
        out.findings.append(Finding(
            "fail", "LABEL_BANNER",
            "schema is not flagged as synthetic", "schema header"))
    if schema_header_line is not None and SYNTHETIC_BANNER not in schema_header_line:
        out.findings.append(Finding(
            "fail", "LABEL_BANNER",
            f"schema file does not open with the banner line {SYNTHETIC_BANNER!r}",
            "schema header"))
    name = os.path.basename(str(dataset_path))
    if policy.required_filename_token.lower() not in name.lower():
        out.findings.append(Finding(
            "fail", "LABEL_FILENAME",
            f"filename {name!r} lacks the token {policy.required_filename_token!r}",
            name))
    bare_columns = [
        c.name for c in synth_schema.columns if policy.affix.strip(c.name) is None
    ]
    if bare_columns:
        out.findings.append(Finding(
            "fail", "LABEL_AFFIX",
            f"columns lack the {policy.affix.kind} {policy.affix.text!r}: {bare_columns}",
            ", ".join(bare_columns)))
    return out


# --- check 2: disclosure ----------------------------------------------------

def _mitigated_columns(trail) -> set[str]:
    out = set()
    for action in trail:
        if action.kind in ("reduce_precision", "top_bottom_code",
                           "pool_categories", "coarsen_key"):
            out.update(action.columns)
    return out


def check_disclosure(
    synth: Dataset,
    original: Dataset,
    keys: KeySpec,
    policy: ReleasePolicy,
    original_schema: TableSchema,
    trail: list[MitigationAction] = (),
    precision: PrecisionMap | None = None,
) -> tuple[CheckOutcome, RiskReport, list]:
    """Run singleton-value detection and risky-record classification, and
    gate the release on the policy's chosen class and bound."""
    out = CheckOutcome("disclosure")
    singletons = detect_singleton_values(original, original_schema, policy.rarity_threshold)
    released = set()
    for name in synth.columns:
        bare = policy.affix.strip(name)
        released.add(bare if bare is not None else name)
    mitigated = _mitigated_columns(trail)
    for column, value, count in singletons:
        if column not in released:
            continue
        severity = "info" if column in mitigated else "fail"
        out.findings.append(Finding(
            severity, "SINGLETON_VALUE",
            f"value {value!r} occurs {count} time(s) in original column {column!r}"
            + (" (mitigated)" if severity == "info" else ""),
            column))
    report = classify_risky_records(
        synth, original, keys, policy.synth_count_threshold, policy.affix, precision
    )
    bounds = {
        "replicated_unique": policy.max_replicated_unique_proportion,
        "unique_in_original": policy.max_unique_in_original_proportion,
    }
    gating = policy.gating_class
    proportion = {
        "replicated_unique": report.p_replicated_unique,
        "unique_in_original": report.p_unique_in_original,
    }[gating]
    if proportion > bounds[gating]:
        rows = report.flagged(gating)
        out.findings.append(Finding(
            "fail", "RISKY_RECORDS",
            f"{gating} proportion {proportion:.6f} exceeds policy bound "
            f"{bounds[gating]:.6f}; flagged rows {list(rows)[:50]}"
            + ("..." if len(rows) > 50 else ""),
            gating))
    else:
        out.findings.append(Finding(
            "info", "RISKY_RECORDS",
            f"{gating} proportion {proportion:.6f} within policy bound "
            f"{bounds[gating]:.6f}",
            gating))
    return out, report, singletons


def check_disclosure_metadata_only(
    original_schema: TableSchema,
    policy: ReleasePolicy,
    trail: list[MitigationAction] = (),
) -> tuple[CheckOutcome, None, list]:
    """Without the original data, key matching cannot be evaluated; the check
    is restricted to flagging the range endpoints that metadata exposes."""
    out = CheckOutcome("disclosure")
    out.findings.append(Finding(
        "warning", "KEY_MATCHING_NOT_EVALUATED",
        "no original data supplied; replicated-unique analysis was not run"))
    mitigated = _mitigated_columns(trail)
    for spec in original_schema.columns:
        if spec.kind in ("numeric", "date") and spec.numeric_range is not None:
            if spec.name in mitigated:
                continue
            lo, hi = spec.numeric_range
            out.findings.append(Finding(
                "warning", "RANGE_ENDPOINT",
                f"metadata exposes the actual range of {spec.name!r} "
                f"({lo} .. {hi}); endpoints may identify individuals",
                spec.name))
    return out, None, []


# --- check 3: structure -----------------------------------------------------

def _has_missing(spec) -> bool:
    if spec.missing_rate is not None:
        return spec.missing_rate > 0
    return spec.missing_allowed


def check_structure(
    original_schema: TableSchema,
    synth_schema: TableSchema,
    synth_data: Dataset,
    policy: ReleasePolicy,
    trail: list[MitigationAction] = (),
) -> CheckOutcome:
    """Names must be a subset of the original's after affix stripping;
    category labels identical except trail-recorded pooling/coarsening;
    missingness presence must agree; precision must match unless a
    precision-reduction action explains the change (then it is a documented
    difference, not a failure)."""
    out = CheckOutcome("structure")
    pooled_labels: dict[str, set[str]] = {}
    precision_reduced: set[str] = set()
    coarsened: dict[str, dict[str, str]] = {}
    for action in trail:
        for col in action.columns:
            if action.kind == "pool_categories":
                pooled_labels.setdefault(col, set()).add(action.params.get("pooled_label", ""))
            elif action.kind == "reduce_precision":
                precision_reduced.add(col)
            elif action.kind == "coarsen_key":
                coarsened.setdefault(col, {}).update(action.params.get("mapping", {}))
    for syn in synth_schema.columns:
        bare = policy.affix.strip(syn.name)
        lookup = bare if bare is not None else syn.name
        if not original_schema.has_column(lookup):
            out.findings.append(Finding(
                "fail", "UNKNOWN_COLUMN",
                f"synthetic column {syn.name!r} has no original counterpart",
                syn.name))
            continue
        orig = original_schema.column(lookup)
        if orig.kind != syn.kind:
            out.findings.append(Finding(
                "fail", "KIND_MISMATCH",
                f"{lookup!r}: original is {orig.kind}, synthetic is {syn.kind}",
                lookup))
            continue
        if orig.kind == "categorical":
            expected = set(orig.categories)
            if lookup in coarsened:
                expected = {coarsened[lookup].get(c, c) for c in expected}
            allowed_extra = pooled_labels.get(lookup, set())
            unexplained = set(syn.categories) - expected - allowed_extra
            if unexplained:
                out.findings.append(Finding(
                    "fail", "CATEGORY_MISMATCH",
                    f"{lookup!r}: synthetic labels not in the original and not "
                    f"explained by the mitigation trail: {sorted(unexplained)}",
                    lookup))
        if _has_missing(orig) != _has_missing(syn):
            out.findings.append(Finding(
                "fail", "MISSINGNESS_DISAGREE",
                f"{lookup!r}: original {'has' if _has_missing(orig) else 'has no'} "
                f"missing values but synthetic "
                f"{'has' if _has_missing(syn) else 'has none'}",
                lookup))
        if orig.precision != syn.precision:
            if lookup in precision_reduced:
                out.findings.append(Finding(
                    "info", "PRECISION_REDUCED",
                    f"{lookup!r}: precision changed from {orig.precision} to "
                    f"{syn.precision} by a recorded mitigation",
                    lookup))
            else:
                out.findings.append(Finding(
                    "fail", "PRECISION_MISMATCH",
                    f"{lookup!r}: original precision {orig.precision}, "
                    f"synthetic {syn.precision}, no mitigation recorded",
                    lookup))
    return out


# --- check 4: documentation ---------------------------------------------------

def generate_documentation(
    config_summary: dict,
    schema_diff: SchemaDiff,
    trail: list[MitigationAction],
    method: str,
    original_metadata_reference: str,
    draft: bool = False,
) -> DocBundle:
    """Assemble the documentation bundle: pointer to the original metadata,
    every structural difference, the mitigation trail, and the statement of
    which relationships the synthetic data preserves."""
    if not original_metadata_reference:
        raise MissingOriginalReference("documentation needs a pointer to the original metadata")
    statement = FROM_MARGINS_STATEMENT if method == "from_margins" else FROM_METADATA_STATEMENT
    return DocBundle(
        original_metadata_reference=original_metadata_reference,
        schema_diff=schema_diff,
        trail=list(trail),
        expectation_statement=statement,
        method=method,
        config_summary=config_summary,
        draft=draft,
    )


def check_documentation(bundle: DocBundle | None) -> CheckOutcome:
    out = CheckOutcome("documentation")
    if bundle is None:
        out.findings.append(Finding(
            "fail", "DOC_MISSING", "no documentation bundle was produced"))
        return out
    if not bundle.original_metadata_reference:
        out.findings.append(Finding(
            "fail", "DOC_NO_ORIGINAL_REF", "no pointer to the original metadata"))
    if not bundle.expectation_statement:
        out.findings.append(Finding(
            "fail", "DOC_NO_EXPECTATION", "no expectation statement present"))
    out.findings.append(Finding(
        "info", "DOC_SUMMARY",
        f"{len(bundle.schema_diff.entries)} documented difference(s), "
        f"{len(bundle.trail)} mitigation action(s)"))
    return out
