import json
import random

import jsonschema
import pytest

from careloop import schema as cs
from careloop.errors import InvalidSchemaError, SchemaPathError
from tests.oracles import corrupt_value, random_schema


class TestCompile:
    def test_literal_set_maps_to_enum(self):
        compiled = cs.compile_schema(cs.literal_set({"A", "B"}), root=False)
        assert compiled == {"enum": ["A", "B"]}

    def test_enum_order_is_sorted(self):
        compiled = cs.compile_schema(cs.literal_set({"b", "a", "c"}), root=False)
        assert compiled["enum"] == ["a", "b", "c"]

    def test_object_field_order_preserved(self):
        node = cs.object_of([("zeta", cs.string()), ("alpha", cs.integer())])
        compiled = cs.compile_schema(node)
        assert list(compiled["properties"]) == ["zeta", "alpha"]
        assert compiled["required"] == ["zeta", "alpha"]

    def test_doc_comments_become_descriptions(self):
        node = cs.object_of([("x", cs.string(), "the x field")], doc="outer")
        compiled = cs.compile_schema(node)
        assert compiled["description"] == "outer"
        assert compiled["properties"]["x"]["description"] == "the x field"

    def test_empty_literal_set_rejected(self):
        with pytest.raises(InvalidSchemaError):
            cs.literal_set(())

    def test_duplicate_field_names_rejected(self):
        with pytest.raises(InvalidSchemaError):
            cs.object_of([("x", cs.string()), ("x", cs.integer())])

    def test_compile_is_deterministic(self):
        node = cs.object_of([("s", cs.sequence(cs.literal_set({"q", "p"}), min_items=1, max_items=3))])
        assert cs.compile_text(node) == cs.compile_text(node)

    def test_fuzz_500_schemas_compile(self):
        rng = random.Random(42)
        for _ in range(500):
            node = random_schema(rng)
            compiled = cs.compile_schema(node)
            json.dumps(compiled)  # must be serializable
            jsonschema.Draft7Validator.check_schema(compiled)


class TestValidate:
    def test_ok_iff_no_violations(self):
        node = cs.object_of([("x", cs.integer())])
        good = cs.validate({"x": 1}, node)
        bad = cs.validate({"x": "no"}, node)
        assert good.ok and not good.violations
        assert not bad.ok and bad.violations

    def test_missing_field_names_the_field(self):
        node = cs.object_of([("needed", cs.string())])
        report = cs.validate({}, node)
        assert "needed" in report.violations[0].reason

    def test_violation_paths(self):
        node = cs.object_of([("items", cs.sequence(cs.literal_set({"ng136", "bmj163"})))])
        report = cs.validate({"items": ["ng136", "xyz"]}, node)
        assert report.violations[0].path == "$.items[1]"

    def test_bool_is_not_integer(self):
        assert not cs.validate(True, cs.integer()).ok

    def test_unexpected_field_flagged(self):
        node = cs.object_of([("x", cs.integer())])
        assert not cs.validate({"x": 1, "y": 2}, node).ok

    def test_sequence_length_bounds(self):
        node = cs.sequence(cs.string(), min_items=1, max_items=2)
        assert not cs.validate([], node).ok
        assert cs.validate(["a"], node).ok
        assert not cs.validate(["a", "b", "c"], node).ok

    def test_agrees_with_jsonschema_on_fuzzed_values(self):
        # Dual-route check: the hand-rolled validator and the jsonschema
        # library must agree on valid and corrupted instances alike.
        rng = random.Random(99)
        for _ in range(200):
            node = random_schema(rng)
            compiled = cs.compile_schema(node)
            value = cs.minimal_instance(node)
            assert cs.validate(value, node).ok
            jsonschema.validate(value, compiled)  # should not raise
            corrupted = corrupt_value(rng, value, node)
            mine = cs.validate(corrupted, node).ok
            theirs = True
            try:
                jsonschema.validate(corrupted, compiled)
            except jsonschema.ValidationError:
                theirs = False
            assert mine == theirs


class TestMinimalInstance:
    def test_integer_is_zero(self):
        assert cs.minimal_instance(cs.integer()) == 0

    def test_literal_picks_sorted_first(self):
        assert cs.minimal_instance(cs.literal_set({"b", "a"})) == "a"

    def test_sequences_at_min_length(self):
        node = cs.sequence(cs.string(), min_items=2)
        assert cs.minimal_instance(node) == ["", ""]

    def test_round_trip_on_500_fuzzed_schemas(self):
        rng = random.Random(7)
        for _ in range(500):
            node = random_schema(rng)
            assert cs.validate(cs.minimal_instance(node), node).ok


class TestBindLiterals:
    def make_plan_like(self):
        return cs.object_of(
            [
                (
                    "items",
                    cs.sequence(
                        cs.object_of(
                            [
                                ("item", cs.string()),
                                ("citations", cs.sequence(cs.literal_set({"__unbound__"}, binder="citations"))),
                            ]
                        )
                    ),
                )
            ]
        )

    def test_bind_by_binder_name(self):
        bound = cs.bind_literals(self.make_plan_like(), "citations", {"ng136"})
        compiled = cs.compile_schema(bound)
        enum = compiled["properties"]["items"]["items"]["properties"]["citations"]["items"]["enum"]
        assert enum == ["ng136"]

    def test_bind_six_ids(self):
        ids = {f"doc{i}" for i in range(6)}
        bound = cs.bind_literals(self.make_plan_like(), "citations", ids)
        compiled = cs.compile_schema(bound)
        enum = compiled["properties"]["items"]["items"]["properties"]["citations"]["items"]["enum"]
        assert len(enum) == 6

    def test_bind_empty_set_errors(self):
        with pytest.raises(InvalidSchemaError):
            cs.bind_literals(self.make_plan_like(), "citations", set())

    def test_original_unchanged(self):
        node = self.make_plan_like()
        cs.bind_literals(node, "citations", {"ng136"})
        assert next(cs.iter_literal_sets(node)).literals == frozenset({"__unbound__"})

    def test_bind_by_dotted_path(self):
        node = cs.object_of([("inner", cs.object_of([("leaf", cs.literal_set({"x"}))]))])
        bound = cs.bind_literals(node, "inner.leaf", {"y", "z"})
        assert cs.validate({"inner": {"leaf": "y"}}, bound).ok
        assert not cs.validate({"inner": {"leaf": "x"}}, bound).ok

    def test_path_descends_through_sequences(self):
        node = cs.object_of([("rows", cs.sequence(cs.object_of([("tag", cs.literal_set({"old"}))])))])
        bound = cs.bind_literals(node, "rows.tag", {"new"})
        assert cs.validate({"rows": [{"tag": "new"}]}, bound).ok

    def test_unknown_path_errors(self):
        with pytest.raises(SchemaPathError):
            cs.bind_literals(cs.object_of([("x", cs.string())]), "nope", {"a"})

    def test_path_to_non_literal_errors(self):
        with pytest.raises(SchemaPathError):
            cs.bind_literals(cs.object_of([("x", cs.string())]), "x", {"a"})

    def test_monotonicity_superset_accepts_subset_values(self):
        # Any value valid under V1 stays valid when bound to V2 (V1 subset of V2).
        rng = random.Random(3)
        base = self.make_plan_like()
        for _ in range(100):
            v1 = {f"id{rng.randint(0, 5)}" for _ in range(rng.randint(1, 3))}
            v2 = v1 | {f"extra{rng.randint(0, 5)}"}
            bound1 = cs.bind_literals(base, "citations", v1)
            bound2 = cs.bind_literals(base, "citations", v2)
            value = {"items": [{"item": "x", "citations": [sorted(v1)[0]]}]}
            assert cs.validate(value, bound1).ok
            assert cs.validate(value, bound2).ok
