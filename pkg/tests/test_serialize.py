"""File formats: scalar strings, round trips, named parse failures."""

from fractions import Fraction

import pytest

from smplab import (
    InstanceBundle,
    RandomInstanceParams,
    TypeDistribution,
    constraint_cardinality,
    coverage_valuation,
    gen_random_instance,
    gen_submodular_lb,
    gen_tree_lb,
    universe_from_type_space,
)
from smplab.serialize import (
    ParseError,
    ReportRecord,
    parse_instance,
    parse_report,
    report_to_csv,
    scalar_to_str,
    serialize_instance,
    serialize_report,
    str_to_scalar,
)


class TestScalars:
    @pytest.mark.parametrize(
        "value",
        [0, 1, -3, 1024, 0.5, 0.3, 1e-9, 1e20, Fraction(1, 3), Fraction(7, 2)],
    )
    def test_round_trip(self, value):
        assert str_to_scalar(scalar_to_str(value)) == value

    def test_fraction_strings_parse(self):
        assert str_to_scalar("1/2") == Fraction(1, 2)
        assert str_to_scalar("5") == 5
        assert str_to_scalar("5.0") == 5.0

    def test_bad_scalar(self):
        with pytest.raises(ParseError):
            str_to_scalar("1/0")
        with pytest.raises(ParseError):
            str_to_scalar("abc")


class TestInstanceRoundTrip:
    def test_empty_universe(self):
        bundle = InstanceBundle(
            universe=universe_from_type_space({}),
            dist=TypeDistribution({}),
            valuation=coverage_valuation({}),
            constraint=constraint_cardinality(0),
        )
        assert parse_instance(serialize_instance(bundle)) == bundle

    def test_triangular_rational_bundle(self):
        bundle = gen_submodular_lb(Fraction(1, 2))
        text = serialize_instance(bundle)
        again = parse_instance(text)
        assert again == bundle
        assert serialize_instance(again) == text  # byte-stable re-serialization

    def test_tree_instance(self):
        bundle = gen_tree_lb(2, 2, Fraction(1, 8))
        assert parse_instance(serialize_instance(bundle)) == bundle

    def test_random_instances_all_kinds(self):
        for seed in range(12):
            inst = gen_random_instance(seed)
            assert parse_instance(serialize_instance(inst)) == inst

    def test_weighted_rank_instance(self):
        params = RandomInstanceParams(
            valuation_kinds=("matroid_intersection_rank", "matching_rank"),
            weight_high=1024,
        )
        for seed in range(6):
            inst = gen_random_instance(seed, params)
            assert parse_instance(serialize_instance(inst)) == inst

    def test_rational_mode_survives_round_trip(self):
        from smplab import adap_exact

        bundle = gen_submodular_lb(Fraction(1, 2))
        again = parse_instance(serialize_instance(bundle))
        before = adap_exact(bundle.tree, bundle.valuation, bundle.universe, bundle.dist)
        after = adap_exact(again.tree, again.valuation, again.universe, again.dist)
        assert before.value == after.value
        assert isinstance(after.value, Fraction)


class TestParseFailures:
    def test_truncated_document(self):
        text = serialize_instance(gen_random_instance(1))
        with pytest.raises(ParseError):
            parse_instance(text[: len(text) // 2])

    def test_wrong_schema(self):
        with pytest.raises(ParseError):
            parse_instance('{"schema": "something-else/9"}')

    def test_unknown_valuation_kind(self):
        text = serialize_instance(gen_random_instance(2))
        broken = text.replace('"kind": "coverage"', '"kind": "mystery"').replace(
            '"kind": "partition_weighted"', '"kind": "mystery"'
        ).replace('"kind": "weighted_rank"', '"kind": "mystery"')
        with pytest.raises(ParseError):
            parse_instance(broken)

    def test_unknown_constraint_kind(self):
        inst = gen_random_instance(3)
        doc = serialize_instance(inst)
        for kind in ("budget", "cardinality", "dag_path"):
            doc = doc.replace(f'"kind": "{kind}"', '"kind": "weird"')
        with pytest.raises(ParseError):
            parse_instance(doc)


class TestReports:
    def records(self):
        return [
            ReportRecord("adap0", 1.25, mode="exact"),
            ReportRecord(
                "ratio", 1.97, mode="exact", bound="ratio >= 1.9", passed=True
            ),
            ReportRecord(
                "adap_mc", 1.24, mode="monte_carlo", seed=7, trials=1000, stderr=0.01
            ),
        ]

    def test_round_trip(self):
        text = serialize_report(self.records(), timings={"wall_seconds": 0.5})
        records, timings = parse_report(text)
        assert records == self.records()
        assert timings == {"wall_seconds": 0.5}

    def test_identical_records_identical_bytes_without_timings(self):
        a = serialize_report(self.records())
        b = serialize_report(self.records())
        assert a == b

    def test_csv_export(self):
        csv_text = report_to_csv(self.records())
        lines = csv_text.strip().split("\n")
        assert lines[0] == "name,value,mode,seed,trials,stderr,bound,pass"
        assert len(lines) == 4
        assert lines[1].startswith("adap0,1.25,exact")

    def test_report_schema_enforced(self):
        with pytest.raises(ParseError):
            parse_report('{"schema": "nope"}')
