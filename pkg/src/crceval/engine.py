"""Evaluation pipelines: comment generation and dual-pass judging.

Covers structured judge-output parsing (tolerant of format noise),
rank regularization, per-case aggregation across the two passes, and the
append-only run store.
"""

from __future__ import annotations

import json
import re
import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .domain import (
    CRITERION_KEYS,
    AnnotationRecord,
    CodeCommentPair,
    GeneratedComment,
    JudgeVerdict,
    QualityVector,
    check_rank_law,
    tie_average_ranks,
)
from .gateway import CompletionRequest, Gateway
from .prompts import (
    COT_HEADER,
    RANKING_HEADER,
    SCORING_HEADER,
    DemonstrationPool,
    build_benchmark_prompt,
    build_judge_prompt,
    build_reviewer_prompt,
)


class JudgeParseError(Exception):
    pass


class JudgeCaseFailed(Exception):
    """A case whose passes could not be parsed within the retry budget."""

    def __init__(self, case_id: str, diagnostics: list[str]):
        super().__init__(f"case {case_id}: {'; '.join(diagnostics)}")
        self.case_id = case_id
        self.diagnostics = diagnostics


# ---------------------------------------------------------------------------
# Tolerant parsing of the judge's "Python dictionary list" sections.
# Accepts double or single quotes, bare identifiers, trailing commas, and
# surrounding prose around the bracketed list.

_BAREWORD = re.compile(r"[A-Za-z0-9_.+-]+")
_NUMBER = re.compile(r"[-+]?\d+(\.\d+)?")


class _ParseFail(Exception):
    pass


def _skip_ws(text: str, pos: int) -> int:
    while pos < len(text) and text[pos] in string.whitespace:
        pos += 1
    return pos


def _parse_value(text: str, pos: int):
    pos = _skip_ws(text, pos)
    if pos >= len(text):
        raise _ParseFail("unexpected end")
    ch = text[pos]
    if ch == "[":
        return _parse_seq(text, pos, "]", dict_mode=False)
    if ch == "{":
        return _parse_seq(text, pos, "}", dict_mode=True)
    if ch in "\"'":
        return _parse_string(text, pos)
    m = _BAREWORD.match(text, pos)
    if m:
        word = m.group()
        if _NUMBER.fullmatch(word):
            return (float(word) if "." in word else int(word)), m.end()
        return word, m.end()
    raise _ParseFail(f"unexpected character {ch!r} at {pos}")


def _parse_string(text: str, pos: int):
    quote = text[pos]
    pos += 1
    out = []
    while pos < len(text):
        ch = text[pos]
        if ch == "\\" and pos + 1 < len(text):
            out.append(text[pos + 1])
            pos += 2
            continue
        if ch == quote:
            return "".join(out), pos + 1
        out.append(ch)
        pos += 1
    raise _ParseFail("unterminated string")


def _parse_seq(text: str, pos: int, closer: str, dict_mode: bool):
    pos += 1  # past the opener
    items = [] if not dict_mode else {}
    while True:
        pos = _skip_ws(text, pos)
        if pos >= len(text):
            raise _ParseFail(f"missing {closer}")
        if text[pos] == closer:
            return items, pos + 1
        if dict_mode:
            key, pos = _parse_value(text, pos)
            pos = _skip_ws(text, pos)
            if pos >= len(text) or text[pos] != ":":
                raise _ParseFail("expected ':' in record")
            value, pos = _parse_value(text, pos + 1)
            items[str(key)] = value
        else:
            value, pos = _parse_value(text, pos)
            items.append(value)
        pos = _skip_ws(text, pos)
        if pos < len(text) and text[pos] == ",":
            pos += 1  # trailing commas fall through to the closer check


def _extract_record_list(text: str) -> list[dict]:
    """Find the first balanced [...] in the text that parses to a record list."""
    for m in re.finditer(r"\[", text):
        try:
            value, _ = _parse_value(text, m.start())
        except _ParseFail:
            continue
        if isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
            return value
    raise JudgeParseError("no parsable record list found")


@dataclass(frozen=True)
class ParsedJudgeOutput:
    scoring: list[tuple[str, list[float]]]  # (alias, nine scores in criterion order)
    cot: str
    ranking: Optional[list[tuple[str, float]]] = None


def _clamp_score(x: float) -> float:
    return min(10.0, max(1.0, float(x)))


def _row_alias_value(row: dict, value_key: str):
    """Support both {"model": a, key: v} records and bare {alias: v} records."""
    if "model" in row:
        alias = str(row["model"])
        for key in (value_key, value_key + "s"):
            if key in row:
                return alias, row[key]
        raise JudgeParseError(f"record for {alias!r} lacks {value_key!r}")
    if len(row) == 1:
        alias, value = next(iter(row.items()))
        return str(alias), value
    raise JudgeParseError(f"unrecognized record shape: {row!r}")


def parse_judge_output(raw: str, expect_ranking: bool = True) -> ParsedJudgeOutput:
    """Parse a judge response into scoring, chain-of-thought, and ranking.

    Malformed-but-ordered rankings (e.g. duplicate integer ranks without
    tie averaging) are regularized via tie_average_ranks on the implied
    order; a missing Scoring section, a scoring row without nine numbers,
    or an unknown alias in the ranking is an error.
    """
    positions = {
        name: raw.find(header)
        for name, header in (
            ("scoring", SCORING_HEADER),
            ("cot", COT_HEADER),
            ("ranking", RANKING_HEADER),
        )
    }
    if positions["scoring"] == -1:
        raise JudgeParseError("missing Scoring section")
    bounds = sorted(p for p in positions.values() if p != -1) + [len(raw)]

    def section(name: str) -> str:
        start = positions[name]
        if start == -1:
            return ""
        end = min(b for b in bounds if b > start)
        return raw[start:end]

    scoring_rows = _extract_record_list(section("scoring"))
    scoring: list[tuple[str, list[float]]] = []
    seen: set[str] = set()
    for row in scoring_rows:
        alias, values = _row_alias_value(row, "score")
        if not isinstance(values, list) or len(values) != len(CRITERION_KEYS):
            raise JudgeParseError(f"scoring row for {alias!r} lacks nine numbers")
        try:
            numbers = [_clamp_score(v) for v in values]
        except (TypeError, ValueError) as exc:
            raise JudgeParseError(f"non-numeric score for {alias!r}") from exc
        if alias in seen:
            raise JudgeParseError(f"duplicate scoring alias {alias!r}")
        seen.add(alias)
        scoring.append((alias, numbers))

    cot_section = section("cot")
    cot = cot_section[len(COT_HEADER):].strip() if cot_section else ""

    ranking: Optional[list[tuple[str, float]]] = None
    if positions["ranking"] != -1:
        ranking_rows = _extract_record_list(section("ranking"))
        parsed: list[tuple[str, float]] = []
        for row in ranking_rows:
            alias, value = _row_alias_value(row, "rank")
            if alias not in seen:
                raise JudgeParseError(f"unknown alias {alias!r} in ranking")
            try:
                parsed.append((alias, float(value)))
            except (TypeError, ValueError) as exc:
                raise JudgeParseError(f"non-numeric rank for {alias!r}") from exc
        ranking = regularize_ranking(parsed)
    if expect_ranking and ranking is None:
        raise JudgeParseError("missing Ranking section")
    return ParsedJudgeOutput(scoring=scoring, cot=cot, ranking=ranking)


def regularize_ranking(ranking: Sequence[tuple[str, float]]) -> list[tuple[str, float]]:
    """Restore the tie-averaged-rank law on the implied order if violated."""
    as_map = dict(ranking)
    if len(as_map) != len(ranking):
        raise JudgeParseError("duplicate alias in ranking")
    if check_rank_law(as_map):
        return [(a, as_map[a]) for a, _ in ranking]
    # Smaller raw rank means better; feed negated ranks as qualities.
    fixed = tie_average_ranks([(alias, -rank) for alias, rank in ranking])
    return [(alias, fixed[alias]) for alias, _ in ranking]


def serialize_judge_output(parsed: ParsedJudgeOutput) -> str:
    """Render a ParsedJudgeOutput back into the canonical response text."""
    lines = [SCORING_HEADER, "["]
    lines += [
        f'    {{"model": "{alias}", "score": {json.dumps(scores)}}},'
        for alias, scores in parsed.scoring
    ]
    lines += ["]", "", COT_HEADER, parsed.cot or "(none)"]
    if parsed.ranking is not None:
        lines += ["", RANKING_HEADER, "["]
        lines += [
            f'    {{"model": "{alias}", "rank": {rank:g}}},'
            for alias, rank in parsed.ranking
        ]
        lines += ["]"]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Pipelines


@dataclass(frozen=True)
class CaseResult:
    case_id: str
    scores: Mapping[str, QualityVector]  # generator_id -> aggregated vector
    ranks: Mapping[str, float]  # generator_id -> aggregated, re-regularized rank
    verdicts: tuple[JudgeVerdict, ...]
    diagnostics: tuple[str, ...] = ()


def _complete_and_parse(
    gateway: Gateway,
    prompt: str,
    model: str,
    expect_ranking: bool,
    parse_retries: int,
    diagnostics: list[str],
    temperature: float,
    max_tokens: int,
) -> tuple[ParsedJudgeOutput, str, float]:
    last_error: Optional[Exception] = None
    for attempt in range(1 + parse_retries):
        result = gateway.complete(
            CompletionRequest(
                prompt=prompt, model=model, temperature=temperature, max_tokens=max_tokens
            )
        )
        try:
            parsed = parse_judge_output(result.text, expect_ranking=expect_ranking)
            return parsed, result.text, result.latency_seconds
        except JudgeParseError as exc:
            last_error = exc
            diagnostics.append(f"attempt {attempt + 1}: {exc}")
    raise last_error  # type: ignore[misc]


def _verdict_from_parsed(
    case_id: str,
    parsed: ParsedJudgeOutput,
    alias_map: Mapping[str, str],
    pass_tag: str,
    raw: str,
) -> JudgeVerdict:
    if set(a for a, _ in parsed.scoring) != set(alias_map):
        raise JudgeParseError(
            f"scoring aliases {sorted(a for a, _ in parsed.scoring)} "
            f"do not match expected {sorted(alias_map)}"
        )
    assert parsed.ranking is not None
    if set(a for a, _ in parsed.ranking) != set(alias_map):
        raise JudgeParseError("ranking does not cover every scored alias")
    scores = {
        alias_map[alias]: QualityVector.clamped(dict(zip(CRITERION_KEYS, values)))
        for alias, values in parsed.scoring
    }
    ranking = {alias_map[alias]: rank for alias, rank in parsed.ranking}
    return JudgeVerdict(
        case_id=case_id,
        model_scores=scores,
        cot=parsed.cot,
        ranking=ranking,
        pass_tag=pass_tag,
        raw_response=raw,
    )


def aggregate_passes(verdicts: Sequence[JudgeVerdict]) -> tuple[dict, dict]:
    """Mean scores per criterion and mean-then-re-regularized ranks."""
    if len(verdicts) < 2:
        raise ValueError("aggregation requires at least two passes")
    ids = sorted(verdicts[0].model_scores)
    scores = {}
    for gid in ids:
        per_criterion = {
            key: sum(v.model_scores[gid][key] for v in verdicts) / len(verdicts)
            for key in CRITERION_KEYS
        }
        scores[gid] = QualityVector(per_criterion)
    mean_ranks = {gid: sum(v.ranking[gid] for v in verdicts) / len(verdicts) for gid in ids}
    ranks = tie_average_ranks([(gid, -r) for gid, r in mean_ranks.items()])
    return scores, ranks


def judge_case(
    case: CodeCommentPair,
    comments: Sequence[tuple[str, str]],
    gateway: Gateway,
    model: str = "mock",
    parse_retries: int = 2,
    temperature: float = 0.1,
    max_tokens: int = 8192,
) -> CaseResult:
    """Judge one case twice (ascending + descending comment order).

    Both passes must parse; a pass that stays malformed after the re-ask
    budget fails the whole case, never a silent single-pass average.
    """
    diagnostics: list[str] = []
    verdicts = []
    for order in ("ascending", "descending"):
        blueprint = build_judge_prompt(case.code, comments, order=order)
        try:
            parsed, raw, _latency = _complete_and_parse(
                gateway,
                blueprint.rendered,
                model,
                expect_ranking=True,
                parse_retries=parse_retries,
                diagnostics=diagnostics,
                temperature=temperature,
                max_tokens=max_tokens,
            )
            verdicts.append(
                _verdict_from_parsed(case.id, parsed, blueprint.alias_map, order, raw)
            )
        except JudgeParseError:
            raise JudgeCaseFailed(case.id, diagnostics)
    scores, ranks = aggregate_passes(verdicts)
    return CaseResult(
        case_id=case.id,
        scores=scores,
        ranks=ranks,
        verdicts=tuple(verdicts),
        diagnostics=tuple(diagnostics),
    )


def judge_benchmark_comment(
    pair: CodeCommentPair,
    gateway: Gateway,
    model: str = "mock",
    evaluator_id: str = "llm-judge",
    parse_retries: int = 2,
    temperature: float = 0.1,
    max_tokens: int = 8192,
) -> AnnotationRecord:
    """Score a dataset's own reference comment (single pass, no ranking)."""
    if not pair.reference_comment:
        raise ValueError(f"pair {pair.id!r} has no reference comment")
    blueprint = build_benchmark_prompt(pair.code, pair.reference_comment)
    diagnostics: list[str] = []
    parsed, _raw, latency = _complete_and_parse(
        gateway,
        blueprint.rendered,
        model,
        expect_ranking=False,
        parse_retries=parse_retries,
        diagnostics=diagnostics,
        temperature=temperature,
        max_tokens=max_tokens,
    )
    if len(parsed.scoring) != 1:
        raise JudgeParseError(f"expected one scoring row, got {len(parsed.scoring)}")
    _alias, values = parsed.scoring[0]
    return AnnotationRecord(
        pair_id=pair.id,
        evaluator_id=evaluator_id,
        evaluator_kind="llm",
        quality=QualityVector.clamped(dict(zip(CRITERION_KEYS, values))),
        elapsed_seconds=latency,
    )


def generate_with_llm_reviewer(
    case: CodeCommentPair,
    pool: DemonstrationPool,
    k: int,
    seed: int,
    gateway: Gateway,
    model: str = "mock",
    temperature: float = 0.1,
    max_tokens: int = 8192,
) -> GeneratedComment:
    """Few-shot generation of one review comment for one case."""
    blueprint = build_reviewer_prompt(case.code, pool, k=k, seed=seed)
    result = gateway.complete(
        CompletionRequest(
            prompt=blueprint.rendered, model=model, temperature=temperature, max_tokens=max_tokens
        )
    )
    text = result.text.strip()
    if not text:
        raise ValueError(f"empty generation for case {case.id!r}")
    return GeneratedComment(
        pair_id=case.id,
        generator_id="llm-reviewer",
        text=text,
        usage={"input_tokens": result.input_tokens, "output_tokens": result.output_tokens},
    )


# ---------------------------------------------------------------------------
# Run store: newline-delimited JSON, append-only.


class RunStore:
    """Append-only JSONL store for pass, aggregate, and generation records."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)

    def append(self, record: dict) -> None:
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")

    def load(self) -> list[dict]:
        if not self.path.exists():
            return []
        with open(self.path, encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]


def _vector_record(vector: QualityVector) -> list[float]:
    return vector.as_list()


def write_case_result(store: RunStore, result: CaseResult) -> None:
    for verdict in result.verdicts:
        store.append(
            {
                "type": "pass",
                "case_id": verdict.case_id,
                "pass_tag": verdict.pass_tag,
                "scores": {g: _vector_record(v) for g, v in verdict.model_scores.items()},
                "ranking": dict(verdict.ranking),
                "cot": verdict.cot,
                "raw_response": verdict.raw_response,
            }
        )
    store.append(
        {
            "type": "aggregate",
            "case_id": result.case_id,
            "scores": {g: _vector_record(v) for g, v in result.scores.items()},
            "ranking": dict(result.ranks),
            "diagnostics": list(result.diagnostics),
        }
    )


def run_generation(
    corpus: Sequence[CodeCommentPair],
    pool: DemonstrationPool,
    gateway: Gateway,
    store: RunStore,
    k: int = 3,
    seed: int = 0,
    model: str = "mock",
) -> list[GeneratedComment]:
    comments = []
    for case in corpus:
        comment = generate_with_llm_reviewer(case, pool, k, seed, gateway, model=model)
        store.append(
            {
                "type": "generation",
                "case_id": case.id,
                "generator_id": comment.generator_id,
                "text": comment.text,
                "usage": dict(comment.usage or {}),
            }
        )
        comments.append(comment)
    return comments


def run_evaluation(
    corpus: Sequence[CodeCommentPair],
    comments_by_case: Mapping[str, Sequence[tuple[str, str]]],
    gateway: Gateway,
    store: RunStore,
    model: str = "mock",
    workers: int = 1,
    parse_retries: int = 2,
) -> tuple[list[CaseResult], list[JudgeCaseFailed]]:
    """Judge every case; results are written to the store in corpus order."""
    results: list[CaseResult] = []
    failures: list[JudgeCaseFailed] = []

    def one(case: CodeCommentPair):
        return judge_case(
            case, comments_by_case[case.id], gateway, model=model, parse_retries=parse_retries
        )

    cases = [c for c in corpus if c.id in comments_by_case]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = [pool.submit(one, case) for case in cases]
        for case, future in zip(cases, futures):
            try:
                result = future.result()
            except JudgeCaseFailed as failure:
                failures.append(failure)
                store.append(
                    {
                        "type": "failure",
                        "case_id": failure.case_id,
                        "diagnostics": failure.diagnostics,
                    }
                )
                continue
            results.append(result)
            write_case_result(store, result)
    return results, failures


def run_audit(
    corpus: Sequence[CodeCommentPair],
    gateway: Gateway,
    store: RunStore,
    model: str = "mock",
    evaluator_id: str = "llm-judge",
) -> list[AnnotationRecord]:
    records = []
    for pair in corpus:
        if not pair.reference_comment:
            continue
        record = judge_benchmark_comment(
            pair, gateway, model=model, evaluator_id=evaluator_id
        )
        store.append(
            {
                "type": "audit",
                "case_id": pair.id,
                "evaluator_id": evaluator_id,
                "quality": record.quality.as_list(),
                "elapsed_seconds": record.elapsed_seconds,
            }
        )
        records.append(record)
    return records
