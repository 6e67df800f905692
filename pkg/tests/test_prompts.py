"""Prompt construction contracts: section order, criteria embedding, aliasing."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from crceval.domain import CRITERIA
from crceval.prompts import (
    COT_HEADER,
    RANKING_HEADER,
    SCORING_HEADER,
    SECTION_DELIMITER,
    DemonstrationPool,
    assign_aliases,
    build_benchmark_prompt,
    build_judge_prompt,
    build_reviewer_prompt,
    criteria_block,
    select_demonstrations,
)

CODE = "int x = 0; while (true) { x++; }"
COMMENTS = [
    ("modelB", "This loop never exits."),
    ("modelA", "Consider adding a break."),
    ("modelC", "why"),
]


class TestCriteriaBlock:
    def test_contains_all_nine_verbatim(self):
        block = criteria_block()
        for criterion in CRITERIA:
            assert f"{criterion.key}. {criterion.name}: {criterion.description}" in block
        assert len(block.splitlines()) == 9

    def test_order_c1_to_c9(self):
        keys = [line.split(".")[0] for line in criteria_block().splitlines()]
        assert keys == [f"C{i}" for i in range(1, 10)]


class TestAliases:
    def test_sorted_id_order(self):
        aliases = assign_aliases(["modelB", "modelA", "modelC"])
        assert aliases == {"model-1": "modelA", "model-2": "modelB", "model-3": "modelC"}

    @given(st.sets(st.text(min_size=1, max_size=6), min_size=1, max_size=8))
    def test_bijection(self, ids):
        aliases = assign_aliases(sorted(ids))
        assert len(aliases) == len(ids)
        assert set(aliases.values()) == ids
        assert list(aliases) == [f"model-{i}" for i in range(1, len(ids) + 1)]


class TestJudgePrompt:
    def test_section_order(self):
        blueprint = build_judge_prompt(CODE, COMMENTS)
        assert [name for name, _ in blueprint.sections] == [
            "scoring_task",
            "guidelines",
            "objects",
            "ranking_task",
            "format",
        ]

    def test_criteria_appear_exactly_once(self):
        rendered = build_judge_prompt(CODE, COMMENTS).rendered
        for criterion in CRITERIA:
            assert rendered.count(f"{criterion.name}: {criterion.description}") == 1

    def test_headers_named_in_format_section(self):
        rendered = build_judge_prompt(CODE, COMMENTS).rendered
        for header in (SCORING_HEADER, COT_HEADER, RANKING_HEADER):
            assert f'"{header}"' in rendered

    def test_delimiter_round_trip(self):
        blueprint = build_judge_prompt(CODE, COMMENTS)
        assert blueprint.split_rendered() == [text for _, text in blueprint.sections]

    def test_real_names_absent(self):
        blueprint = build_judge_prompt(CODE, COMMENTS)
        for generator_id, _ in COMMENTS:
            assert generator_id not in blueprint.rendered

    def test_descending_reverses_listing(self):
        ascending = build_judge_prompt(CODE, COMMENTS, order="ascending").rendered
        descending = build_judge_prompt(CODE, COMMENTS, order="descending").rendered
        assert ascending.index("model-1:") < ascending.index("model-3:")
        assert descending.index("model-3:") < descending.index("model-1:")

    def test_alias_map_matches_sorted_ids(self):
        blueprint = build_judge_prompt(CODE, COMMENTS)
        assert blueprint.alias_map["model-1"] == "modelA"
        assert blueprint.alias_map["model-3"] == "modelC"

    def test_errors(self):
        with pytest.raises(ValueError):
            build_judge_prompt(CODE, COMMENTS[:1])
        with pytest.raises(ValueError):
            build_judge_prompt(CODE, COMMENTS, order="sideways")
        with pytest.raises(ValueError):
            build_judge_prompt(CODE, [("m", "a"), ("m", "b")])


class TestBenchmarkPrompt:
    def test_no_ranking_sections(self):
        blueprint = build_benchmark_prompt(CODE, "Fix the loop bound.")
        names = [name for name, _ in blueprint.sections]
        assert "ranking_task" not in names
        assert f'"{RANKING_HEADER}"' not in blueprint.rendered

    def test_criteria_once_and_round_trip(self):
        blueprint = build_benchmark_prompt(CODE, "Fix the loop bound.")
        assert blueprint.rendered.count(CRITERIA[0].description) == 1
        assert blueprint.split_rendered() == [text for _, text in blueprint.sections]

    def test_empty_comment_raises(self):
        with pytest.raises(ValueError, match="empty comment"):
            build_benchmark_prompt(CODE, "   ")


class TestReviewerPrompt:
    def test_zero_shot(self):
        blueprint = build_reviewer_prompt(CODE, k=0)
        names = [name for name, _ in blueprint.sections]
        assert names == ["gen_task", "guidelines", "target"]
        assert "1. Code snippet:" in blueprint.rendered

    def test_numbered_demonstrations(self, demo_pool):
        blueprint = build_reviewer_prompt(CODE, pool=demo_pool, k=3, seed=7)
        rendered = blueprint.rendered
        for i in (1, 2, 3):
            assert f"{i}. Code snippet:" in rendered
            assert f"{i}. Comment:" in rendered
        assert "4. Code snippet:" in rendered
        assert rendered.rstrip().endswith("4. Comment:")

    def test_seed_determinism_and_pinned_selection(self, demo_pool):
        # Frozen from random.Random(7).sample(range(5), 3) == [2, 1, 3].
        chosen = select_demonstrations(demo_pool, 3, seed=7)
        assert chosen == [demo_pool.items[2], demo_pool.items[1], demo_pool.items[3]]
        assert select_demonstrations(demo_pool, 3, seed=7) == chosen
        assert select_demonstrations(demo_pool, 3, seed=8) != chosen

    def test_errors(self, demo_pool):
        with pytest.raises(ValueError):
            build_reviewer_prompt(CODE, k=2)  # no pool
        with pytest.raises(ValueError):
            select_demonstrations(demo_pool, 6, seed=0)
        with pytest.raises(ValueError):
            select_demonstrations(demo_pool, -1, seed=0)
        with pytest.raises(ValueError):
            DemonstrationPool(items=(("code", " "),))

    def test_round_trip(self, demo_pool):
        blueprint = build_reviewer_prompt(CODE, pool=demo_pool, k=2, seed=1)
        assert blueprint.split_rendered() == [text for _, text in blueprint.sections]


def test_delimiter_is_bare_triple_hash():
    assert SECTION_DELIMITER == "###"
