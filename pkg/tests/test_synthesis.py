import math
import random
from collections import Counter
from datetime import date
from decimal import Decimal

import pytest

from lfsd.dataset import Dataset, write_csv
from lfsd.errors import (
    DegenerateRange,
    EmptyOriginal,
    MethodMismatch,
    TransformPreconditionViolated,
)
from lfsd.schema import AffixRule, ColumnSpec, TableSchema, infer_schema, validate
from lfsd.synthesis import (
    DatePairTransform,
    SynthesisConfig,
    TotalTransform,
    apply_transform_pipeline,
    invert_transform_pipeline,
    synth_from_margins,
    synth_from_metadata,
)


def authored(*cols) -> TableSchema:
    return TableSchema(tuple(cols), 0, "authored_metadata")


class TestFromMetadata:
    def test_categorical_frequencies_within_binomial_bound(self):
        schema = authored(ColumnSpec("c", "categorical", categories=("A", "B", "C")))
        out = synth_from_metadata(schema, SynthesisConfig("from_metadata", 3000, 11))
        counts = Counter(out.column("synth_c"))
        # binomial(3000, 1/3): sd = sqrt(n p (1-p))
        sd = math.sqrt(3000 * (1 / 3) * (2 / 3))
        for label in ("A", "B", "C"):
            assert abs(counts[label] - 1000) <= 3 * sd

    def test_degenerate_range_emits_constant(self):
        schema = authored(ColumnSpec("x", "numeric",
                                     numeric_range=(Decimal(5), Decimal(5)), precision=0))
        out = synth_from_metadata(schema, SynthesisConfig("from_metadata", 20, 1))
        assert set(out.column("synth_x")) == {Decimal(5)}

    def test_inverted_range_errors(self):
        # min > max is rejected at spec construction already
        with pytest.raises(ValueError):
            ColumnSpec("x", "numeric", numeric_range=(Decimal(9), Decimal(1)), precision=0)
        # a range too narrow for the declared precision errors at generation
        schema = authored(ColumnSpec("x", "numeric",
                                     numeric_range=(Decimal("0.2"), Decimal("0.4")),
                                     precision=-1))
        with pytest.raises(DegenerateRange):
            synth_from_metadata(schema, SynthesisConfig("from_metadata", 5, 1))

    def test_coarse_units_give_multiples_of_1000(self):
        schema = authored(ColumnSpec("income", "numeric",
                                     numeric_range=(Decimal(0), Decimal(90000)),
                                     precision=-3))
        out = synth_from_metadata(schema, SynthesisConfig("from_metadata", 200, 5))
        assert all(v % 1000 == 0 for v in out.column("synth_income"))

    def test_method_mismatch(self):
        schema = authored(ColumnSpec("c", "categorical", categories=("A",)))
        with pytest.raises(MethodMismatch):
            synth_from_metadata(schema, SynthesisConfig("from_margins", 5, 1))

    def test_output_validates_against_schema(self):
        schema = authored(
            ColumnSpec("c", "categorical", categories=("A", "B")),
            ColumnSpec("x", "numeric", numeric_range=(Decimal("-2.5"), Decimal("7.5")),
                       precision=1),
            ColumnSpec("d", "date", numeric_range=(date(2019, 1, 1), date(2020, 6, 1)),
                       precision="month"),
        )
        out = synth_from_metadata(schema, SynthesisConfig("from_metadata", 400, 9))
        bare = out.rename_columns({c: c.removeprefix("synth_") for c in out.columns})
        assert validate(bare, schema) == []

    def test_missing_injected_at_configured_rate(self):
        schema = authored(ColumnSpec("c", "categorical", categories=("A", "B"),
                                     missing_allowed=True))
        out = synth_from_metadata(
            schema, SynthesisConfig("from_metadata", 5000, 4, metadata_missing_rate=0.2))
        rate = sum(1 for c in out.column("synth_c") if c is None) / 5000
        sd = math.sqrt(0.2 * 0.8 / 5000)
        assert abs(rate - 0.2) <= 3 * sd

    def test_year_granularity_dates_are_jan_first(self):
        schema = authored(ColumnSpec("d", "date",
                                     numeric_range=(date(2010, 1, 1), date(2020, 1, 1)),
                                     precision="year"))
        out = synth_from_metadata(schema, SynthesisConfig("from_metadata", 100, 2))
        assert all(c.month == 1 and c.day == 1 for c in out.column("synth_d"))


class TestFromMargins:
    def test_bootstrap_values_all_come_from_pool(self):
        original = Dataset(["x"], {"x": [Decimal(i) for i in (3, 1, 4, 1, 5, 9, 2, 6)]})
        out = synth_from_margins(original, SynthesisConfig("from_margins", 8, 21))
        pool = set(original.column("x"))
        assert all(v in pool for v in out.column("synth_x"))

    def test_empty_original_errors(self):
        with pytest.raises(EmptyOriginal):
            synth_from_margins(Dataset(["x"], {"x": []}),
                               SynthesisConfig("from_margins", 5, 1))

    def test_correlated_columns_become_independent(self):
        # two perfectly correlated binary columns; the synthetic joint must
        # approximate the product of the margins
        n = 10000
        original = Dataset(["a", "b"], {"a": ["0", "1"] * 100, "b": ["0", "1"] * 100})
        out = synth_from_margins(original, SynthesisConfig("from_margins", n, 17))
        both_one = sum(1 for x, y in zip(out.column("synth_a"), out.column("synth_b"))
                       if x == "1" and y == "1") / n
        p_a = sum(1 for x in out.column("synth_a") if x == "1") / n
        p_b = sum(1 for y in out.column("synth_b") if y == "1") / n
        # direct binomial bound on the joint cell frequency around 0.25
        sd = math.sqrt(0.25 * 0.75 / n)
        assert abs(both_one - p_a * p_b) <= 4 * sd

    def test_missing_rate_preserved(self):
        n = 10000
        cells = [None if i % 4 == 0 else "v" for i in range(100)]
        original = Dataset(["x"], {"x": cells})
        out = synth_from_margins(original, SynthesisConfig("from_margins", n, 3))
        rate = sum(1 for c in out.column("synth_x") if c is None) / n
        sd = math.sqrt(0.25 * 0.75 / n)
        assert abs(rate - 0.25) <= 3 * sd

    def test_determinism_byte_identical(self, tmp_path):
        rng = random.Random(0)
        original = Dataset(["a", "x"], {
            "a": [rng.choice("pq") for _ in range(50)],
            "x": [Decimal(rng.randrange(100)) for _ in range(50)],
        })
        cfg = SynthesisConfig("from_margins", 200, 99)
        p1, p2 = tmp_path / "one.csv", tmp_path / "two.csv"
        write_csv(synth_from_margins(original, cfg), p1)
        write_csv(synth_from_margins(original, cfg), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_adding_a_column_never_perturbs_other_columns(self):
        base = Dataset(["a"], {"a": [Decimal(i) for i in range(30)]})
        extended = base.with_column("b", ["x"] * 30)
        cfg = SynthesisConfig("from_margins", 40, 7)
        out1 = synth_from_margins(base, cfg)
        out2 = synth_from_margins(extended, cfg)
        assert out1.column("synth_a") == out2.column("synth_a")

    def test_affix_applied_to_every_column(self, simple_original):
        out = synth_from_margins(simple_original, SynthesisConfig("from_margins", 10, 1))
        assert all(c.startswith("synth_") for c in out.columns)
        suffixed = synth_from_margins(
            simple_original,
            SynthesisConfig("from_margins", 10, 1, affix=AffixRule("suffix", "_synth")))
        assert all(c.endswith("_synth") for c in suffixed.columns)


def make_survival_original(n=200, seed=1):
    rng = random.Random(seed)
    diagnosis, death = [], []
    base = date(2015, 1, 1).toordinal()
    for _ in range(n):
        d0 = base + rng.randrange(0, 2000)
        diagnosis.append(date.fromordinal(d0))
        death.append(date.fromordinal(d0 + rng.randrange(0, 400)))
    return Dataset(["diagnosis", "death"], {"diagnosis": diagnosis, "death": death})


class TestTransforms:
    def test_forward_replaces_date_with_duration(self):
        original = make_survival_original(20)
        spec = DatePairTransform("diagnosis", "death", "survival_days")
        out = apply_transform_pipeline(original, [spec])
        assert out.columns == ["diagnosis", "survival_days"]
        assert all(v >= 0 for v in out.column("survival_days"))

    def test_precondition_violation_reported_not_fixed(self):
        original = Dataset(["diagnosis", "death"], {
            "diagnosis": [date(2020, 5, 1), date(2020, 1, 1)],
            "death": [date(2020, 4, 1), date(2020, 2, 1)],
        })
        spec = DatePairTransform("diagnosis", "death", "survival_days")
        with pytest.raises(TransformPreconditionViolated) as exc:
            apply_transform_pipeline(original, [spec])
        assert exc.value.rows == (0,)

    def test_synthesis_with_transform_keeps_death_after_diagnosis(self):
        original = make_survival_original(200)
        cfg = SynthesisConfig("from_margins", 10000, 13,
                              transforms=(DatePairTransform("diagnosis", "death",
                                                            "survival_days"),))
        out = synth_from_margins(original, cfg)
        assert out.columns == ["synth_diagnosis", "synth_death"]
        assert all(b >= a for a, b in zip(out.column("synth_diagnosis"),
                                          out.column("synth_death")))

    def test_total_recomputed_exactly(self):
        original = Dataset(["wages", "benefits", "total"], {
            "wages": [Decimal("100.50"), Decimal("200")],
            "benefits": [Decimal("10"), Decimal("20.25")],
            "total": [Decimal("110.50"), Decimal("220.25")],
        })
        spec = TotalTransform("total", ("wages", "benefits"))
        cfg = SynthesisConfig("from_margins", 50, 5, transforms=(spec,))
        out = synth_from_margins(original, cfg)
        for w, b, t in zip(out.column("synth_wages"), out.column("synth_benefits"),
                           out.column("synth_total")):
            assert t == w + b

    def test_total_precondition_checked(self):
        original = Dataset(["a", "b", "total"], {
            "a": [Decimal(1)], "b": [Decimal(2)], "total": [Decimal(5)]})
        with pytest.raises(TransformPreconditionViolated):
            apply_transform_pipeline(original, [TotalTransform("total", ("a", "b"))])

    def test_invert_restores_forward(self):
        original = make_survival_original(50)
        specs = [DatePairTransform("diagnosis", "death", "survival_days")]
        forward = apply_transform_pipeline(original, specs)
        back = invert_transform_pipeline(forward, specs, original.columns)
        assert back == original

    def test_metadata_transform_requires_authored_duration(self):
        schema = TableSchema((
            ColumnSpec("diagnosis", "date",
                       numeric_range=(date(2015, 1, 1), date(2020, 1, 1)), precision="day"),
            ColumnSpec("death", "date",
                       numeric_range=(date(2015, 1, 1), date(2021, 1, 1)), precision="day"),
        ), 0, "authored_metadata")
        spec = DatePairTransform("diagnosis", "death", "survival_days")
        with pytest.raises(TransformPreconditionViolated):
            synth_from_metadata(schema, SynthesisConfig("from_metadata", 10, 1,
                                                        transforms=(spec,)))
        with_duration = TableSchema(
            schema.columns + (ColumnSpec("survival_days", "numeric",
                                         numeric_range=(Decimal(0), Decimal(400)),
                                         precision=0),),
            0, "authored_metadata")
        out = synth_from_metadata(with_duration,
                                  SynthesisConfig("from_metadata", 500, 1,
                                                  transforms=(spec,)))
        assert set(out.columns) == {"synth_diagnosis", "synth_death"}
        assert all(b >= a for a, b in zip(out.column("synth_diagnosis"),
                                          out.column("synth_death")))


def test_margin_preservation_tvd_shrinks():
    # total variation to the original margin at n = 50 * n_orig stays small
    from lfsd.fidelity import compare_margin
    original = Dataset(["c"], {"c": ["A"] * 120 + ["B"] * 50 + ["C"] * 20 + ["D"] * 10})
    out = synth_from_margins(original, SynthesisConfig("from_margins", 50 * 200, 23))
    comparison = compare_margin(original, out, "c", affix=AffixRule())
    # multinomial concentration: E[TVD] <= sum sqrt(p(1-p)/n)/2, plus slack
    p = [0.6, 0.25, 0.1, 0.05]
    n = 50 * 200
    bound = sum(math.sqrt(q * (1 - q) / n) for q in p) / 2 + math.sqrt(math.log(100) / (2 * n))
    assert comparison.value < bound
