from decimal import Decimal

import pytest

from conftest import make_benign_original, make_identifying_original, write_config
from lfsd.checks import (
    FROM_MARGINS_STATEMENT,
    FROM_METADATA_STATEMENT,
    ReleasePolicy,
    check_disclosure,
    check_labelling,
    check_structure,
    generate_documentation,
)
from lfsd.config import load_config
from lfsd.dataset import Dataset, write_csv
from lfsd.errors import MissingOriginalReference
from lfsd.pipeline import run_all
from lfsd.reporting import dump_structured
from lfsd.risk import KeySpec
from lfsd.schema import SchemaDiff, infer_schema, mark_synthetic
from lfsd.sdc import MitigationAction, pool_categories, reduce_precision
from lfsd.synthesis import SynthesisConfig, synth_from_margins

POLICY = ReleasePolicy()


def synth_pair(original, n=100, seed=42):
    synth = synth_from_margins(original, SynthesisConfig("from_margins", n, seed))
    return synth, mark_synthetic(infer_schema(synth), "original.csv")


class TestLabelling:
    def test_well_labelled_release_passes(self):
        original = make_benign_original()
        _, schema = synth_pair(original)
        outcome = check_labelling("census_synthetic_2024.csv", schema, POLICY,
                                  "# SYNTHETIC DATA — NOT REAL RECORDS")
        assert outcome.verdict == "pass"

    def test_filename_without_token_fails(self):
        original = make_benign_original()
        _, schema = synth_pair(original)
        outcome = check_labelling("census_2024.csv", schema, POLICY)
        assert outcome.verdict == "fail"
        assert "LABEL_FILENAME" in [f.code for f in outcome.findings]

    def test_bare_column_fails_affix_check(self):
        original = make_benign_original()
        synth, _ = synth_pair(original)
        synth = synth.rename_columns({"synth_sex": "age"})
        schema = mark_synthetic(infer_schema(synth), "x")
        outcome = check_labelling("x_synthetic.csv", schema, POLICY)
        codes = {f.code: f for f in outcome.findings}
        assert outcome.verdict == "fail"
        assert "age" in codes["LABEL_AFFIX"].message

    def test_missing_banner_fails(self):
        original = make_benign_original()
        _, schema = synth_pair(original)
        outcome = check_labelling("x_synthetic.csv", schema, POLICY, "header: {}")
        assert "LABEL_BANNER" in [f.code for f in outcome.findings]


class TestDisclosure:
    def test_zero_risky_records_passes(self):
        original = make_benign_original()
        synth, _ = synth_pair(original)
        outcome, report, singletons = check_disclosure(
            synth, original, KeySpec(("sex", "area")), POLICY, infer_schema(original))
        assert outcome.verdict == "pass"
        assert report.n_synth_unique == 0
        assert singletons == []

    def test_replicated_uniques_fail_default_policy(self):
        # 2 replicated uniques in 500 rows = proportion 0.004 > bound 0.0
        original = Dataset(["k"], {"k": [Decimal(i) for i in range(600)]})
        synth = Dataset(["k"], {"k": [Decimal(500)] * 249 + [Decimal(501)] * 249
                                + [Decimal(1), Decimal(2)]})
        policy = ReleasePolicy(gating_class="replicated_unique",
                               max_unique_in_original_proportion=1.0,
                               rarity_threshold=1)
        outcome, report, _ = check_disclosure(
            synth, original, KeySpec(("k",)), policy, infer_schema(original))
        assert report.n_replicated_unique == 2
        assert report.p_replicated_unique == pytest.approx(0.004)
        assert outcome.verdict == "fail"

    def test_ungated_class_does_not_fail(self):
        original = Dataset(["k"], {"k": [Decimal(7), Decimal(7), Decimal(7)]})
        synth = Dataset(["k"], {"k": [Decimal(7)]})
        policy = ReleasePolicy(gating_class="replicated_unique",
                               max_unique_in_original_proportion=1.0,
                               rarity_threshold=1)
        outcome, report, _ = check_disclosure(
            synth, original, KeySpec(("k",)), policy, infer_schema(original))
        # unique-in-original present, but the gate watches replicated uniques
        assert report.n_unique_in_original == 1
        assert report.n_replicated_unique == 0
        assert outcome.verdict == "pass"

    def test_unmitigated_singleton_fails_and_mitigation_downgrades(self):
        original = Dataset(["county"],
                           {"county": ["Fife"] * 20 + ["Shetland"] * 3})
        synth, schema = synth_pair(original, n=50, seed=3)
        outcome, _, _ = check_disclosure(
            synth, original, KeySpec(("county",)), POLICY, infer_schema(original))
        assert outcome.verdict == "fail"
        trail = [MitigationAction("pool_categories", ("county",),
                                  {"pooled_label": "OTHER_POOLED"})]
        outcome2, _, _ = check_disclosure(
            synth, original, KeySpec(("county",)), POLICY, infer_schema(original),
            trail=trail)
        assert all(f.severity != "fail" or f.code != "SINGLETON_VALUE"
                   for f in outcome2.findings)


class TestStructure:
    def test_untouched_margins_output_passes(self):
        original = make_benign_original()
        synth, schema = synth_pair(original)
        outcome = check_structure(infer_schema(original), schema, synth, POLICY)
        assert outcome.verdict == "pass"

    def test_missingness_disagreement_fails(self):
        original = make_benign_original()
        synth, _ = synth_pair(original)
        no_missing = synth.replace_column(
            "synth_score",
            [c if c is not None else Decimal(10) for c in synth.column("synth_score")])
        schema = mark_synthetic(infer_schema(no_missing), "x")
        outcome = check_structure(infer_schema(original), schema, no_missing, POLICY)
        assert outcome.verdict == "fail"
        assert "MISSINGNESS_DISAGREE" in [f.code for f in outcome.findings]

    def test_pooling_explained_by_trail_passes(self):
        original = Dataset(["c"], {"c": ["A"] * 10 + ["B"] * 2})
        synth, schema = synth_pair(original, n=60, seed=1)
        synth, schema, action = pool_categories(synth, schema, "synth_c", 5,
                                                original=original.rename_columns({"c": "synth_c"}))
        trail = [MitigationAction(action.kind, ("c",), action.params)]
        outcome = check_structure(infer_schema(original), schema, synth, POLICY, trail)
        assert outcome.verdict == "pass"
        # without the trail the pooled label is unexplained
        outcome2 = check_structure(infer_schema(original), schema, synth, POLICY)
        assert outcome2.verdict == "fail"

    def test_precision_change_needs_recorded_mitigation(self):
        original = Dataset(["x"], {"x": [Decimal("1.25"), Decimal("3.75")]})
        synth, schema = synth_pair(original, n=20, seed=2)
        synth, schema, action = reduce_precision(synth, schema, "synth_x", Decimal("0.5"))
        outcome = check_structure(infer_schema(original), schema, synth, POLICY)
        assert "PRECISION_MISMATCH" in [f.code for f in outcome.findings]
        trail = [MitigationAction(action.kind, ("x",), action.params)]
        outcome2 = check_structure(infer_schema(original), schema, synth, POLICY, trail)
        assert outcome2.verdict == "pass"

    def test_unknown_synth_column_fails(self):
        original = make_benign_original()
        synth, _ = synth_pair(original)
        renamed = synth.rename_columns({"synth_sex": "synth_zzz"})
        schema = mark_synthetic(infer_schema(renamed), "x")
        outcome = check_structure(infer_schema(original), schema, renamed, POLICY)
        assert "UNKNOWN_COLUMN" in [f.code for f in outcome.findings]


class TestDocumentation:
    def test_statement_matches_method(self):
        for method, statement in (("from_margins", FROM_MARGINS_STATEMENT),
                                  ("from_metadata", FROM_METADATA_STATEMENT)):
            bundle = generate_documentation({}, SchemaDiff(), [], method, "orig.yaml")
            assert bundle.expectation_statement == statement
        assert "one variable at a time" in FROM_MARGINS_STATEMENT
        assert FROM_METADATA_STATEMENT.startswith("No tables")

    def test_empty_diff_still_carries_statement(self):
        bundle = generate_documentation({}, SchemaDiff(), [], "from_margins", "orig.yaml")
        assert bundle.schema_diff.is_empty()
        assert bundle.expectation_statement

    def test_missing_reference_errors(self):
        with pytest.raises(MissingOriginalReference):
            generate_documentation({}, SchemaDiff(), [], "from_margins", "")


class TestRunAll:
    def _passing_config(self, tmp_path, **extra):
        original = make_benign_original()
        write_csv(original, tmp_path / "original.csv")
        doc = dict(
            original_data="original.csv",
            output_dir="out",
            synthesis={"method": "margins", "n_synth": 100, "seed": 42},
            keys=["sex", "area"],
        )
        doc.update(extra)
        write_config(tmp_path / "config.yaml", **doc)
        return load_config(tmp_path / "config.yaml")

    def test_passing_fixture_passes_all_checks(self, tmp_path):
        report, paths = run_all(self._passing_config(tmp_path))
        assert report.overall_verdict == "pass"
        assert all(o.verdict == "pass" for o in report.outcomes.values())
        assert "synthetic" in paths["synthetic_data"]
        assert report.doc_bundle.expectation_statement == FROM_MARGINS_STATEMENT
        assert not report.doc_bundle.draft

    def test_forced_replicated_uniques_fail_disclosure(self, tmp_path):
        original = make_identifying_original()
        write_csv(original, tmp_path / "original.csv")
        write_config(tmp_path / "config.yaml",
                     original_data="original.csv", output_dir="out",
                     synthesis={"method": "margins", "n_synth": 100, "seed": 7},
                     keys=["pid"],
                     policy={"rarity_threshold": 1})
        report, _ = run_all(load_config(tmp_path / "config.yaml"))
        assert report.outcomes["disclosure"].verdict == "fail"
        assert report.overall_verdict == "fail"
        assert report.doc_bundle.draft

    def test_remove_records_mitigation_recovers_pass(self, tmp_path):
        original = make_identifying_original()
        write_csv(original, tmp_path / "original.csv")
        write_config(tmp_path / "config.yaml",
                     original_data="original.csv", output_dir="out",
                     synthesis={"method": "margins", "n_synth": 100, "seed": 7},
                     keys=["pid"],
                     policy={"rarity_threshold": 1},
                     mitigations=[
                         {"kind": "reduce_precision", "column": "pid", "unit": 50},
                         {"kind": "remove_records", "class": "unique_in_original"},
                     ])
        report, _ = run_all(load_config(tmp_path / "config.yaml"))
        assert report.outcomes["disclosure"].verdict == "pass"
        assert any(a.kind == "remove_records" for a in report.trail) or \
            report.risk_report.n_unique_in_original == 0

    def test_metadata_only_run_marks_key_matching_not_evaluated(self, tmp_path):
        from lfsd.schema import write_schema
        original = make_benign_original()
        schema = infer_schema(original)
        write_schema(schema, tmp_path / "original.schema.yaml")
        write_config(tmp_path / "config.yaml",
                     original_metadata="original.schema.yaml", output_dir="out",
                     synthesis={"method": "metadata", "n_synth": 50, "seed": 1})
        report, _ = run_all(load_config(tmp_path / "config.yaml"))
        assert not report.key_matching_evaluated
        assert report.risk_report is None
        codes = [f.code for f in report.outcomes["disclosure"].findings]
        assert "KEY_MATCHING_NOT_EVALUATED" in codes
        assert report.doc_bundle.expectation_statement == FROM_METADATA_STATEMENT

    def test_rerun_is_byte_identical(self, tmp_path):
        config = self._passing_config(tmp_path)
        report1, _ = run_all(config)
        first = dump_structured(report1.to_dict())
        report2, _ = run_all(config)
        assert dump_structured(report2.to_dict()) == first
