"""Judge-output parsing and dual-pass evaluation tests."""

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_corpus
from crceval.domain import CRITERION_KEYS, QualityVector, check_rank_law, tie_average_ranks
from crceval.engine import (
    CaseResult,
    JudgeCaseFailed,
    JudgeParseError,
    ParsedJudgeOutput,
    RunStore,
    aggregate_passes,
    generate_with_llm_reviewer,
    judge_benchmark_comment,
    judge_case,
    parse_judge_output,
    regularize_ranking,
    run_evaluation,
    run_generation,
    serialize_judge_output,
    write_case_result,
)
from crceval.gateway import Gateway, MockProvider, ProviderResponse
from crceval.mockjudge import synthetic_response

OK_RESPONSE = """### Scoring:
[
    {"model": "model-1", "score": [8, 7, 9, 6, 5, 7, 8, 6, 9]},
    {"model": "model-2", "score": [4, 3, 5, 2, 3, 4, 5, 3, 4]},
]

### Chain-of-Thoughts:
Model 1 explains the defect; model 2 is vague.

### Ranking:
[
    {"model": "model-1", "rank": 1},
    {"model": "model-2", "rank": 2},
]
"""


class ScriptedProvider:
    """Returns a fixed sequence of texts, one per send() call."""

    name = "scripted"

    def __init__(self, texts):
        self.texts = list(texts)
        self.attempts = 0

    def send(self, request):
        self.attempts += 1
        if not self.texts:
            raise AssertionError("script exhausted")
        return ProviderResponse(text=self.texts.pop(0))


class TestParser:
    def test_canonical_response(self):
        parsed = parse_judge_output(OK_RESPONSE)
        assert parsed.scoring[0] == ("model-1", [8, 7, 9, 6, 5, 7, 8, 6, 9])
        assert parsed.ranking == [("model-1", 1.0), ("model-2", 2.0)]
        assert "vague" in parsed.cot

    def test_single_quotes(self):
        text = OK_RESPONSE.replace('"', "'")
        parsed = parse_judge_output(text)
        assert parsed.ranking == [("model-1", 1.0), ("model-2", 2.0)]

    def test_barewords(self):
        text = OK_RESPONSE.replace('"model-1"', "model-1").replace('"model-2"', "model-2")
        parsed = parse_judge_output(text)
        assert [alias for alias, _ in parsed.scoring] == ["model-1", "model-2"]

    def test_surrounding_prose(self):
        text = "Sure! Here is my analysis.\n\n" + OK_RESPONSE + "\nHope that helps."
        parsed = parse_judge_output(text)
        assert len(parsed.scoring) == 2

    def test_bare_alias_records(self):
        text = OK_RESPONSE.replace(
            '{"model": "model-1", "rank": 1},\n    {"model": "model-2", "rank": 2},',
            "{model-1: 1}, {model-2: 2},",
        )
        parsed = parse_judge_output(text)
        assert parsed.ranking == [("model-1", 1.0), ("model-2", 2.0)]

    def test_duplicate_integer_ranks_regularized(self):
        text = OK_RESPONSE.replace('"rank": 2', '"rank": 1')
        parsed = parse_judge_output(text)
        assert parsed.ranking == [("model-1", 1.5), ("model-2", 1.5)]

    def test_scores_clamped(self):
        text = OK_RESPONSE.replace("[8, 7, 9, 6, 5, 7, 8, 6, 9]", "[11, 7, 9, 6, 0, 7, 8, 6, 9]")
        parsed = parse_judge_output(text)
        assert parsed.scoring[0][1][0] == 10.0
        assert parsed.scoring[0][1][4] == 1.0

    def test_missing_scoring_raises(self):
        with pytest.raises(JudgeParseError, match="Scoring"):
            parse_judge_output("### Ranking:\n[{model-1: 1}]")

    def test_wrong_score_count_raises(self):
        text = OK_RESPONSE.replace("[8, 7, 9, 6, 5, 7, 8, 6, 9]", "[8, 7, 9]")
        with pytest.raises(JudgeParseError, match="nine"):
            parse_judge_output(text)

    def test_unknown_ranking_alias_raises(self):
        text = OK_RESPONSE.replace('{"model": "model-2", "rank": 2}', '{"model": "model-9", "rank": 2}')
        with pytest.raises(JudgeParseError, match="unknown alias"):
            parse_judge_output(text)

    def test_missing_ranking_when_expected(self):
        text = OK_RESPONSE.split("### Ranking:")[0]
        with pytest.raises(JudgeParseError, match="Ranking"):
            parse_judge_output(text, expect_ranking=True)
        parsed = parse_judge_output(text, expect_ranking=False)
        assert parsed.ranking is None

    def test_duplicate_scoring_alias_raises(self):
        text = OK_RESPONSE.replace('"model-2"', '"model-1"')
        with pytest.raises(JudgeParseError, match="duplicate"):
            parse_judge_output(text)


parsed_st = st.integers(2, 6).flatmap(
    lambda m: st.tuples(
        st.lists(
            st.floats(1, 10).map(lambda x: round(x, 1)), min_size=9 * m, max_size=9 * m
        ),
        st.permutations(range(m)),
        st.just(m),
    )
)


class TestRoundTrip:
    @given(parsed_st)
    def test_serialize_then_parse(self, data):
        flat_scores, order, m = data
        aliases = [f"model-{i}" for i in range(1, m + 1)]
        scoring = [
            (alias, flat_scores[i * 9 : (i + 1) * 9]) for i, alias in enumerate(aliases)
        ]
        ranking = [(aliases[j], float(i + 1)) for i, j in enumerate(order)]
        ranking.sort(key=lambda kv: aliases.index(kv[0]))
        original = ParsedJudgeOutput(scoring=scoring, cot="reasoning", ranking=ranking)
        parsed = parse_judge_output(serialize_judge_output(original))
        assert parsed.scoring == scoring
        assert dict(parsed.ranking) == dict(ranking)
        assert parsed.cot == "reasoning"


class TestRegularize:
    def test_valid_ranking_untouched(self):
        ranking = [("a", 1.5), ("b", 1.5), ("c", 3.0)]
        assert regularize_ranking(ranking) == ranking

    def test_ordered_but_unaveraged(self):
        fixed = dict(regularize_ranking([("a", 1.0), ("b", 1.0), ("c", 2.0)]))
        assert fixed == {"a": 1.5, "b": 1.5, "c": 3.0}

    @given(st.lists(st.floats(1, 10), min_size=2, max_size=6))
    def test_always_restores_rank_law(self, raw):
        ranking = [(f"m{i}", r) for i, r in enumerate(raw)]
        fixed = dict(regularize_ranking(ranking))
        assert check_rank_law(fixed)


def vector(value):
    return QualityVector({k: value for k in CRITERION_KEYS})


def make_verdict(case_id, scores, ranking, tag):
    from crceval.domain import JudgeVerdict

    return JudgeVerdict(
        case_id=case_id,
        model_scores={g: vector(s) for g, s in scores.items()},
        cot="",
        ranking=ranking,
        pass_tag=tag,
        raw_response="",
    )


class TestAggregation:
    def test_mean_of_eight_and_six_is_seven(self):
        verdicts = [
            make_verdict("c", {"A": 8.0, "B": 4.0}, {"A": 1.0, "B": 2.0}, "ascending"),
            make_verdict("c", {"A": 6.0, "B": 4.0}, {"A": 1.0, "B": 2.0}, "descending"),
        ]
        scores, ranks = aggregate_passes(verdicts)
        assert scores["A"]["C1"] == pytest.approx(7.0)
        assert ranks == {"A": 1.0, "B": 2.0}

    def test_opposite_ranks_average_to_tie(self):
        verdicts = [
            make_verdict("c", {"A": 8.0, "B": 8.0}, {"A": 1.0, "B": 2.0}, "ascending"),
            make_verdict("c", {"A": 8.0, "B": 8.0}, {"A": 2.0, "B": 1.0}, "descending"),
        ]
        _, ranks = aggregate_passes(verdicts)
        assert ranks == {"A": 1.5, "B": 1.5}

    def test_mean_ranks_are_re_regularized(self):
        # Per-pass rankings are lawful, but their means {1.25, 1.75, 3.0}
        # are not; aggregation must restore the tie-averaged form {1, 2, 3}.
        verdicts = [
            make_verdict(
                "c", {"A": 9.0, "B": 8.0, "C": 5.0}, {"A": 1.0, "B": 2.0, "C": 3.0}, "a"
            ),
            make_verdict(
                "c", {"A": 9.0, "B": 8.0, "C": 5.0}, {"A": 1.5, "B": 1.5, "C": 3.0}, "d"
            ),
        ]
        _, ranks = aggregate_passes(verdicts)
        assert check_rank_law(ranks)
        assert ranks == {"A": 1.0, "B": 2.0, "C": 3.0}

    def test_requires_two_passes(self):
        verdict = make_verdict("c", {"A": 8.0, "B": 4.0}, {"A": 1.0, "B": 2.0}, "a")
        with pytest.raises(ValueError):
            aggregate_passes([verdict])


class TestJudgeCase:
    def test_offline_case(self, offline_gateway):
        case = make_corpus(1)[0]
        comments = [("gen-a", "This loop never terminates."), ("gen-b", "lgtm")]
        result = judge_case(case, comments, offline_gateway)
        assert set(result.scores) == {"gen-a", "gen-b"}
        assert check_rank_law(dict(result.ranks))
        assert len(result.verdicts) == 2
        assert {v.pass_tag for v in result.verdicts} == {"ascending", "descending"}

    def test_order_swap_symmetry(self, offline_gateway):
        # The synthetic judge scores by comment content only, so swapping
        # the listing order must not change the aggregate.
        rng = random.Random(5)
        cases = make_corpus(20, seed=6)
        for case in cases:
            comments = [
                ("gen-a", f"Comment alpha {rng.randint(0, 999)}"),
                ("gen-b", f"Comment beta {rng.randint(0, 999)}"),
                ("gen-c", f"Comment gamma {rng.randint(0, 999)}"),
            ]
            forward = judge_case(case, comments, offline_gateway)
            backward = judge_case(case, list(reversed(comments)), offline_gateway)
            assert forward.scores == backward.scores
            assert forward.ranks == backward.ranks

    def test_parse_retry_then_success(self):
        ok = synthetic_response

        class HybridProvider:
            name = "hybrid"

            def __init__(self):
                self.attempts = 0

            def send(self, request):
                self.attempts += 1
                if self.attempts == 1:
                    return ProviderResponse(text="garbage with no sections")
                return ProviderResponse(text=ok(request.prompt))

        hybrid = HybridProvider()
        case = make_corpus(1)[0]
        result = judge_case(
            case, [("a", "First comment."), ("b", "Second comment.")], Gateway(hybrid)
        )
        assert any("attempt 1" in d for d in result.diagnostics)
        assert hybrid.attempts == 3  # 1 garbage + 2 successful passes

    def test_budget_exhaustion_fails_case(self):
        provider = MockProvider(fallback=lambda p: "never parsable")
        case = make_corpus(1)[0]
        with pytest.raises(JudgeCaseFailed) as excinfo:
            judge_case(
                case,
                [("a", "x"), ("b", "y")],
                Gateway(provider),
                parse_retries=2,
            )
        assert excinfo.value.case_id == case.id
        assert len(excinfo.value.diagnostics) == 3  # initial + 2 re-asks
        assert provider.attempts == 3


class TestBenchmarkAndGeneration:
    def test_benchmark_audit_record(self, offline_gateway):
        pair = make_corpus(1)[0]
        record = judge_benchmark_comment(pair, offline_gateway)
        assert record.pair_id == pair.id
        assert record.evaluator_kind == "llm"
        assert all(1 <= record.quality[k] <= 10 for k in CRITERION_KEYS)
        assert record.category is None  # single-comment audit carries no labels

    def test_benchmark_needs_reference(self, offline_gateway):
        pair = make_corpus(1, with_reference=False)[0]
        with pytest.raises(ValueError, match="reference"):
            judge_benchmark_comment(pair, offline_gateway)

    def test_generation_is_deterministic(self, offline_gateway, demo_pool):
        case = make_corpus(1)[0]
        first = generate_with_llm_reviewer(case, demo_pool, 3, 7, offline_gateway)
        second = generate_with_llm_reviewer(case, demo_pool, 3, 7, offline_gateway)
        assert first.text == second.text
        assert first.generator_id == "llm-reviewer"
        assert "synthetic-review-" in first.text


class TestRuns:
    def test_run_evaluation_store_order(self, offline_gateway, tmp_path):
        corpus = make_corpus(5)
        comments = {
            case.id: [("gen-a", f"alpha {case.id}"), ("gen-b", f"beta {case.id}")]
            for case in corpus
        }
        store = RunStore(tmp_path / "run.jsonl")
        results, failures = run_evaluation(corpus, comments, offline_gateway, store, workers=4)
        assert failures == []
        aggregates = [r for r in store.load() if r["type"] == "aggregate"]
        assert [r["case_id"] for r in aggregates] == [c.id for c in corpus]

    def test_run_evaluation_records_failures(self, tmp_path):
        corpus = make_corpus(2)
        comments = {case.id: [("a", "x"), ("b", "y")] for case in corpus}
        gateway = Gateway(MockProvider(fallback=lambda p: "nope"))
        store = RunStore(tmp_path / "run.jsonl")
        results, failures = run_evaluation(corpus, comments, gateway, store)
        assert results == []
        assert len(failures) == 2
        assert all(r["type"] == "failure" for r in store.load())

    def test_run_generation(self, offline_gateway, demo_pool, tmp_path):
        corpus = make_corpus(3)
        store = RunStore(tmp_path / "gen.jsonl")
        comments = run_generation(corpus, demo_pool, offline_gateway, store, k=2, seed=1)
        assert [c.pair_id for c in comments] == [c.id for c in corpus]
        assert all(r["type"] == "generation" for r in store.load())

    def test_write_case_result_round_trip(self, offline_gateway, tmp_path):
        case = make_corpus(1)[0]
        result = judge_case(case, [("a", "First."), ("b", "Second.")], offline_gateway)
        store = RunStore(tmp_path / "run.jsonl")
        write_case_result(store, result)
        records = store.load()
        assert [r["type"] for r in records] == ["pass", "pass", "aggregate"]
        assert records[-1]["ranking"] == dict(result.ranks)
