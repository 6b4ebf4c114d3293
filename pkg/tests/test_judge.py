import pytest

from careloop.config import JUDGE_CATEGORIES
from careloop.core.types import ActionItem, ManagementPlan, PlanReasoning
from careloop.gateway.base import ModelGateway
from careloop.gateway.scripted import ScriptedBackend
from careloop.mx.judge import judge_plans, judge_schema, shuffle_pattern


def plan(*items):
    return ManagementPlan(
        in_visit_investigations=tuple(ActionItem(i, ()) for i in items),
        provenance=(),
        reasoning=PlanReasoning(),
    )


def verdict_value(winner):
    out = {}
    for category in JUDGE_CATEGORIES:
        out[f"{category}_analysis"] = [f"analysis for {category}"]
        out[category] = winner
    return out


def always_a_gateway():
    backend = ScriptedBackend()
    backend.add_rule(verdict_value("A"), tag="mx.judge")
    return ModelGateway(backend)


def find_seed_with_swaps(n_swapped: int, n: int = 4) -> int:
    for seed in range(10_000):
        if sum(shuffle_pattern(seed, n)) == n_swapped:
            return seed
    raise AssertionError("no such seed")


class TestJudge:
    def test_nine_categories_present(self):
        verdict = judge_plans("case", plan("a"), plan("b"), gateway=always_a_gateway(), seed=0)
        assert set(verdict.winners) == set(JUDGE_CATEGORIES)
        assert len(JUDGE_CATEGORIES) == 9

    def test_always_a_judge_with_two_swaps_gives_half(self):
        # slot-A-biased judge: after de-permutation each plan wins exactly
        # the trials where it sat in slot A
        seed = find_seed_with_swaps(2, 4)
        verdict = judge_plans("case", plan("a"), plan("b"), gateway=always_a_gateway(), n_shuffles=4, seed=seed)
        assert all(rate == pytest.approx(0.5) for rate in verdict.win_rates.values())

    def test_identical_plans_symmetric_judge_is_half(self):
        # content-based judge: prefers the lexicographically smaller rendered
        # plan, so identical plans split exactly with the shuffle pattern
        def content_judge(req):
            a, b = req.context["plan_a"], req.context["plan_b"]
            return verdict_value("A" if str(a.to_dict()) <= str(b.to_dict()) else "B")

        backend = ScriptedBackend()
        backend.add_rule(content_judge, tag="mx.judge")
        gateway = ModelGateway(backend)
        seed = find_seed_with_swaps(2, 4)
        verdict = judge_plans("case", plan("same"), plan("same"), gateway=gateway, n_shuffles=4, seed=seed)
        assert all(rate == pytest.approx(0.5) for rate in verdict.win_rates.values())

    def test_depermutation_swapping_inputs_swaps_winners(self):
        # deterministic content judge that always prefers the plan
        # containing the marker item, wherever it sits
        def marker_judge(req):
            a = req.context["plan_a"]
            in_a = any("MARKER" in item.item for _, _, item in a.items())
            return verdict_value("A" if in_a else "B")

        backend = ScriptedBackend()
        backend.add_rule(marker_judge, tag="mx.judge")
        gateway = ModelGateway(backend)
        p, q = plan("MARKER item"), plan("plain item")
        forward = judge_plans("case", p, q, gateway=gateway, n_shuffles=4, seed=11)
        backward = judge_plans("case", q, p, gateway=gateway, n_shuffles=4, seed=11)
        for category in JUDGE_CATEGORIES:
            assert forward.win_rates[category] == pytest.approx(1.0)
            assert backward.win_rates[category] == pytest.approx(0.0)
            assert forward.winners[category] == "A"
            assert backward.winners[category] == "B"

    def test_analyses_collected_per_category(self):
        verdict = judge_plans("case", plan("a"), plan("b"), gateway=always_a_gateway(), n_shuffles=4, seed=0)
        for category in JUDGE_CATEGORIES:
            assert len(verdict.analyses[category]) == 4

    def test_empty_plan_rejected(self):
        with pytest.raises(ValueError):
            judge_plans("case", plan(), plan("b"), gateway=always_a_gateway())

    def test_win_rates_in_unit_interval(self):
        verdict = judge_plans("case", plan("a"), plan("b"), gateway=always_a_gateway(), seed=5)
        assert all(0.0 <= r <= 1.0 for r in verdict.win_rates.values())

    def test_schema_orders_analysis_before_verdict(self):
        from careloop import schema as cs

        compiled = cs.compile_schema(judge_schema())
        names = list(compiled["properties"])
        for category in JUDGE_CATEGORIES:
            assert names.index(f"{category}_analysis") < names.index(category)

    def test_shuffle_pattern_deterministic(self):
        assert shuffle_pattern(42, 8) == shuffle_pattern(42, 8)
