"""Report serialization: structured YAML plus a human-readable rendering.

Files are written atomically (temp file + rename) so a crashed run never
leaves a half-written report that looks complete.
"""

from __future__ import annotations

import os
import tempfile

import yaml

from .checks import FullReport


def atomic_write_text(path, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_structured(doc: dict) -> str:
    return yaml.safe_dump(doc, sort_keys=False, allow_unicode=True, width=100)


def _render_findings(findings) -> list[str]:
    lines = []
    for f in findings:
        loc = f" [{f.location}]" if f.location else ""
        lines.append(f"    {f.severity.upper():7s} {f.code}: {f.message}{loc}")
    return lines or ["    (no findings)"]


def render_human(report: FullReport) -> str:
    lines = []
    lines.append("LFSD RELEASE REPORT")
    lines.append("=" * 60)
    lines.append(f"Overall verdict: {report.overall_verdict.upper()}")
    lines.append("")
    titles = {
        "labelling": "Check 1 - Labelling",
        "disclosure": "Check 2 - Disclosure",
        "structure": "Check 3 - Structure",
        "documentation": "Check 4 - Documentation",
    }
    for check_id, title in titles.items():
        outcome = report.outcomes[check_id]
        lines.append(f"{title}: {outcome.verdict.upper()}")
        lines.extend(_render_findings(outcome.findings))
        lines.append("")
    if report.risk_report is not None:
        r = report.risk_report
        lines.append("Risk summary")
        lines.append(f"    keys: {', '.join(r.keys)} (threshold {r.synth_count_threshold})")
        lines.append(f"    synthetic rows:        {r.n_synth}")
        lines.append(f"    synth-unique:          {r.n_synth_unique} ({r.p_synth_unique:.4f})")
        lines.append(f"    unique-in-original:    {r.n_unique_in_original} ({r.p_unique_in_original:.4f})")
        lines.append(f"    replicated uniques:    {r.n_replicated_unique} ({r.p_replicated_unique:.4f})")
        lines.append("")
    elif not report.key_matching_evaluated:
        lines.append("Risk summary: key matching NOT EVALUATED (no original data supplied)")
        lines.append("")
    if report.fidelity:
        lines.append("Margin fidelity (total variation distance)")
        for m in report.fidelity:
            lines.append(f"    {m.column:24s} {m.value:.4f}  ({m.statistic})")
        lines.append("")
    if report.trail:
        lines.append("Mitigation trail")
        for i, action in enumerate(report.trail):
            lines.append(f"    {i + 1}. {action.kind} on {', '.join(action.columns)}: {action.params}")
        lines.append("")
    if report.doc_bundle is not None:
        b = report.doc_bundle
        lines.append("Documentation bundle" + (" (DRAFT)" if b.draft else ""))
        lines.append(f"    original metadata: {b.original_metadata_reference}")
        lines.append(f"    method: {b.method}")
        lines.append(f"    expectation: {b.expectation_statement}")
        if b.schema_diff.entries:
            lines.append("    documented differences:")
            for e in b.schema_diff.entries:
                lines.append(f"        {e.column}: {e.code} {e.detail}")
        else:
            lines.append("    documented differences: none")
        lines.append("")
    lines.append("Policy")
    for key, value in report.policy.to_dict().items():
        lines.append(f"    {key}: {value}")
    lines.append("")
    return "\n".join(lines)


def write_report(report: FullReport, out_dir, formats=("structured", "human")) -> dict:
    paths = {}
    if "structured" in formats:
        path = os.path.join(out_dir, "release_report.yaml")
        atomic_write_text(path, dump_structured(report.to_dict()))
        paths["structured"] = path
    if "human" in formats:
        path = os.path.join(out_dir, "release_report.txt")
        atomic_write_text(path, render_human(report))
        paths["human"] = path
    return paths
