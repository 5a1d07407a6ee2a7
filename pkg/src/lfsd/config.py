"""Pipeline configuration: one YAML document drives synthesis, mitigation,
checking, and reporting. Validation reports every problem at once."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import yaml

from .errors import ConfigError
from .risk import KeySpec
from .checks import ReleasePolicy
from .schema import AffixRule
from .synthesis import DatePairTransform, SynthesisConfig, TotalTransform

MITIGATION_KINDS = (
    "reduce_precision", "top_bottom_code", "pool_categories",
    "remove_records", "coarsen_key",
)


@dataclass
class PipelineConfig:
    output_dir: str
    original_data: str | None = None
    original_metadata: str | None = None
    synthetic_data: str | None = None
    synthetic_schema: str | None = None
    synthesis: SynthesisConfig | None = None
    keys: KeySpec | None = None
    policy: ReleasePolicy = field(default_factory=ReleasePolicy)
    mitigations: list[dict] = field(default_factory=list)
    report_formats: tuple[str, ...] = ("structured", "human")
    missing_token: str = ""

    def summary(self) -> dict:
        doc = {
            "original_data": self.original_data,
            "original_metadata": self.original_metadata,
            "keys": list(self.keys.columns) if self.keys else None,
            "mitigations": self.mitigations,
        }
        if self.synthesis is not None:
            doc["synthesis"] = {
                "method": self.synthesis.method,
                "n_synth": self.synthesis.n_synth,
                "seed": self.synthesis.seed,
                "affix": {"kind": self.synthesis.affix.kind, "text": self.synthesis.affix.text},
                "metadata_missing_rate": self.synthesis.metadata_missing_rate,
                "transforms": [
                    {k: v for k, v in t.__dict__.items()} for t in self.synthesis.transforms
                ],
            }
        else:
            doc["synthetic_data"] = self.synthetic_data
        return doc


def _parse_affix(raw, problems) -> AffixRule:
    if raw is None:
        return AffixRule()
    if isinstance(raw, str):
        # bare string: trailing underscore style chooses prefix, leading chooses suffix
        if raw.startswith("_"):
            return AffixRule("suffix", raw)
        return AffixRule("prefix", raw)
    try:
        return AffixRule(raw.get("kind", "prefix"), raw.get("text", "synth_"))
    except (ValueError, AttributeError) as exc:
        problems.append(f"affix: {exc}")
        return AffixRule()


def _parse_transforms(raw, problems) -> tuple:
    out = []
    for i, t in enumerate(raw or []):
        kind = t.get("kind", "")
        try:
            if kind in ("date_pair", "date_pair_to_origin_plus_duration"):
                out.append(DatePairTransform(
                    origin=t["origin"], other=t["other"],
                    duration_name=t.get("duration", t.get("duration_name", "duration_days")),
                ))
            elif kind in ("total", "total_to_components"):
                out.append(TotalTransform(total=t["total"], components=tuple(t["components"])))
            else:
                problems.append(f"transforms[{i}]: unknown kind {kind!r}")
        except KeyError as exc:
            problems.append(f"transforms[{i}]: missing field {exc}")
    return tuple(out)


def _parse_synthesis(raw, affix, problems) -> SynthesisConfig | None:
    if raw is None:
        return None
    method = raw.get("method", "from_margins")
    if method in ("margins", "metadata"):
        method = "from_" + method
    try:
        return SynthesisConfig(
            method=method,
            n_synth=int(raw.get("n_synth", raw.get("n", 0)) or 0),
            seed=int(raw.get("seed", 0)),
            affix=affix,
            transforms=_parse_transforms(raw.get("transforms"), problems),
            metadata_missing_rate=float(raw.get("metadata_missing_rate", 0.05)),
        )
    except (ValueError, TypeError) as exc:
        problems.append(f"synthesis: {exc}")
        return None


def _parse_policy(raw, affix, problems) -> ReleasePolicy:
    raw = raw or {}
    try:
        return ReleasePolicy(
            max_replicated_unique_proportion=float(
                raw.get("max_replicated_unique_proportion", 0.0)),
            max_unique_in_original_proportion=float(
                raw.get("max_unique_in_original_proportion", 0.01)),
            gating_class=raw.get("gating_class", "unique_in_original"),
            synth_count_threshold=int(raw.get("synth_count_threshold", 1)),
            rarity_threshold=int(raw.get("rarity_threshold", 5)),
            affix=affix,
            required_filename_token=raw.get("required_filename_token", "synthetic"),
        )
    except (ValueError, TypeError) as exc:
        problems.append(f"policy: {exc}")
        return ReleasePolicy(affix=affix)


def _parse_mitigations(raw, problems) -> list[dict]:
    out = []
    for i, m in enumerate(raw or []):
        kind = m.get("kind")
        if kind not in MITIGATION_KINDS:
            problems.append(f"mitigations[{i}]: unknown kind {kind!r}")
            continue
        if kind != "remove_records" and not m.get("column"):
            problems.append(f"mitigations[{i}]: {kind} needs a column")
            continue
        out.append(dict(m))
    return out


def config_from_dict(doc: dict, base_dir: str = ".") -> PipelineConfig:
    problems: list[str] = []
    doc = doc or {}

    def path_of(key):
        raw = doc.get(key)
        if raw is None:
            return None
        return raw if os.path.isabs(raw) else os.path.join(base_dir, raw)

    affix = _parse_affix(doc.get("affix") or (doc.get("synthesis") or {}).get("affix"), problems)
    synthesis = _parse_synthesis(doc.get("synthesis"), affix, problems)

    keys = None
    raw_keys = doc.get("keys")
    if raw_keys:
        if isinstance(raw_keys, str):
            raw_keys = [k.strip() for k in raw_keys.split(",") if k.strip()]
        keys = KeySpec(tuple(raw_keys))

    config = PipelineConfig(
        output_dir=path_of("output_dir") or base_dir,
        original_data=path_of("original_data"),
        original_metadata=path_of("original_metadata"),
        synthetic_data=path_of("synthetic_data"),
        synthetic_schema=path_of("synthetic_schema"),
        synthesis=synthesis,
        keys=keys,
        policy=_parse_policy(doc.get("policy"), affix, problems),
        mitigations=_parse_mitigations(doc.get("mitigations"), problems),
        report_formats=tuple(doc.get("report_formats", ("structured", "human"))),
        missing_token=doc.get("missing_token", ""),
    )

    if config.original_data is None and config.original_metadata is None:
        problems.append("one of original_data / original_metadata is required")
    if config.synthesis is not None and config.synthesis.method == "from_margins" \
            and config.original_data is None:
        problems.append("from_margins synthesis requires original_data")
    if config.synthesis is not None and config.synthesis.n_synth < 1:
        problems.append("synthesis.n_synth must be >= 1")
    for key in ("original_data", "original_metadata", "synthetic_data", "synthetic_schema"):
        path = getattr(config, key)
        if path is not None and not os.path.exists(path):
            problems.append(f"{key}: no such file: {path}")
    if problems:
        raise ConfigError(problems)
    return config


def load_config(path) -> PipelineConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError([f"cannot read config: {exc}"])
    except yaml.YAMLError as exc:
        raise ConfigError([f"config is not valid YAML: {exc}"])
    return config_from_dict(doc, base_dir=os.path.dirname(os.path.abspath(path)))
