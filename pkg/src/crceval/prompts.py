"""Deterministic construction of the three prompt families.

Judge prompts (multi-comment scoring + ranking), the single-comment
benchmark-audit variant, and the few-shot reviewer generation prompt.
Blueprints are pure text; provider chat-role wrapping happens in the
gateway so blueprints stay provider-agnostic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .domain import CRITERIA

# Literal delimiter line between sections. "### Scoring:" etc. inside the
# format section are headers for the judge's *output*, not delimiters.
SECTION_DELIMITER = "###"

SCORING_HEADER = "### Scoring:"
COT_HEADER = "### Chain-of-Thoughts:"
RANKING_HEADER = "### Ranking:"


def criteria_block() -> str:
    """The nine criteria, one per line. Single source of truth: domain.CRITERIA."""
    return "\n".join(f"{c.key}. {c.name}: {c.description}" for c in CRITERIA)


@dataclass(frozen=True)
class PromptBlueprint:
    """An ordered list of named sections plus their rendered concatenation."""

    kind: str  # "judge_full" | "judge_benchmark" | "reviewer"
    sections: tuple[tuple[str, str], ...]
    alias_map: Mapping[str, str] = field(default_factory=dict)  # alias -> generator_id

    @property
    def rendered(self) -> str:
        return f"\n{SECTION_DELIMITER}\n".join(text for _, text in self.sections)

    def split_rendered(self) -> list[str]:
        """Split the rendered text back into section texts (round-trip check)."""
        parts: list[list[str]] = [[]]
        for line in self.rendered.split("\n"):
            if line == SECTION_DELIMITER:
                parts.append([])
            else:
                parts[-1].append(line)
        return ["\n".join(p) for p in parts]


@dataclass(frozen=True)
class DemonstrationPool:
    """Curated (code, exemplar comment) pairs for few-shot generation."""

    items: tuple[tuple[str, str], ...]

    def __post_init__(self):
        for code, comment in self.items:
            if not code.strip() or not comment.strip():
                raise ValueError("demonstrations must have nonempty code and comment")


_JUDGE_SCORING_TASK = (
    "As a thorough and unbiased AI evaluator, you're tasked with ranking several "
    "AI models based on the quality of their code review comments for a given "
    "problematic code snippet. For each model, you will assign a score from 1-10 "
    "(higher scores indicate better performance) for each of the following nine "
    "metrics. Upon scoring, you will create an overall leaderboard for the models."
)

_BENCHMARK_SCORING_TASK = (
    "As a thorough and unbiased AI evaluator, you're tasked with assessing the "
    "quality of a single code review comment for a given problematic code snippet. "
    "You will assign a score from 1-10 (higher scores indicate better performance) "
    "for each of the following nine metrics."
)

_JUDGE_RANKING_TASK = (
    "After scoring, rank the models by their overall performance quality. A rank "
    "of 1 signifies the best output. If models tie, assign them the average rank "
    "corresponding to their position. For example, if two models tie for first "
    "place, both receive a rank of 1.5, and the next model gets a rank of 3. If "
    "three models tie for second place, all are ranked 3, and the next model, if "
    "any, is ranked 5."
)

_REVIEWER_TASK = (
    "As a thorough AI code reviewer, you're tasked to review several code "
    "snippets. Each code snippet may contain one or more issues. For each code "
    "snippet, you should provide a succinct explanatory comment according to the "
    "following guidelines."
)


def _guidelines_section() -> str:
    return (
        "Please note:\n"
        "- Avoid any positional bias. The order of comments must not influence ranking.\n"
        "- The length of the comments should not affect your evaluation.\n"
        "- Models' names should not influence your judgment.\n"
        "- Maintain objectivity throughout the process.\n"
        "\n"
        "The nine metrics are:\n" + criteria_block()
    )


def _format_section(include_ranking: bool) -> str:
    lines = [
        "Structure your output as follows:",
        SCORING_HEADER,
        "[",
        '    {"model": <model-name>, "score": [list of scores in order]},',
        "    ...",
        "]",
        "",
        COT_HEADER,
        "Provide a short explanation for your scoring",
    ]
    if include_ranking:
        lines += [
            "",
            RANKING_HEADER,
            "[",
            '    {"model": <model-name>, "rank": <model-rank>},',
            "    ...",
            "]",
            "",
            'The sections "Scoring" and "Ranking" must be valid Python dictionary '
            "lists, ready to be directly executed in Python. Each section should "
            'begin with its respective title, exclusively: "### Scoring:", '
            '"### Chain-of-Thoughts:", and "### Ranking:". The goal is to produce '
            "a ranking human evaluators would agree with.",
        ]
    else:
        lines += [
            "",
            'The section "Scoring" must be a valid Python dictionary list, ready '
            "to be directly executed in Python. Each section should begin with its "
            'respective title, exclusively: "### Scoring:" and '
            '"### Chain-of-Thoughts:".',
        ]
    return "\n".join(lines)


def assign_aliases(generator_ids: Sequence[str]) -> dict[str, str]:
    """Map neutral aliases model-1..m onto generator ids (sorted id order).

    Anonymization enforces the no-name-bias guideline; the judge never
    sees real generator names.
    """
    return {f"model-{i}": gid for i, gid in enumerate(sorted(generator_ids), 1)}


def build_judge_prompt(
    code: str,
    comments: Sequence[tuple[str, str]],
    order: str = "ascending",
) -> PromptBlueprint:
    """Build the full scoring+ranking judge prompt for one case.

    `comments` is a list of (generator_id, text); ids are hidden behind
    model-1..m aliases. `order` controls the comment listing direction
    within the objects section (alias order is the base order).
    """
    if len(comments) < 2:
        raise ValueError("judge prompt needs at least 2 comments to compare")
    if order not in ("ascending", "descending"):
        raise ValueError(f"bad order {order!r}")
    ids = [gid for gid, _ in comments]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate generator ids")
    alias_map = assign_aliases(ids)
    text_by_id = dict(comments)
    listed = sorted(alias_map.items(), key=lambda kv: int(kv[0].split("-")[1]))
    if order == "descending":
        listed = listed[::-1]
    comment_list = "\n".join(
        f"{alias}:\n{text_by_id[gid]}" for alias, gid in listed
    )
    objects = (
        "Problematic code snippet:\n"
        f"{code}\n"
        "Comments from the models:\n"
        f"{comment_list}"
    )
    sections = (
        ("scoring_task", _JUDGE_SCORING_TASK),
        ("guidelines", _guidelines_section()),
        ("objects", objects),
        ("ranking_task", _JUDGE_RANKING_TASK),
        ("format", _format_section(include_ranking=True)),
    )
    return PromptBlueprint(kind="judge_full", sections=sections, alias_map=alias_map)


def build_benchmark_prompt(code: str, single_comment: str) -> PromptBlueprint:
    """Single-comment audit variant: the ranking task and format are excluded."""
    if not single_comment.strip():
        raise ValueError("empty comment")
    alias_map = {"model-1": "benchmark"}
    objects = (
        "Problematic code snippet:\n"
        f"{code}\n"
        "Comment to evaluate:\n"
        f"model-1:\n{single_comment}"
    )
    sections = (
        ("scoring_task", _BENCHMARK_SCORING_TASK),
        ("guidelines", _guidelines_section()),
        ("objects", objects),
        ("format", _format_section(include_ranking=False)),
    )
    return PromptBlueprint(kind="judge_benchmark", sections=sections, alias_map=alias_map)


def select_demonstrations(
    pool: DemonstrationPool, k: int, seed: int
) -> list[tuple[str, str]]:
    """Seeded-uniform selection of k demonstrations without replacement.

    PRNG: Python's Mersenne Twister (random.Random(seed)), drawing index
    positions via sample().
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if k > len(pool.items):
        raise ValueError(f"k={k} exceeds pool size {len(pool.items)}")
    rng = random.Random(seed)
    positions = rng.sample(range(len(pool.items)), k)
    return [pool.items[i] for i in positions]


def build_reviewer_prompt(
    target_code: str,
    pool: Optional[DemonstrationPool] = None,
    k: int = 3,
    seed: int = 0,
) -> PromptBlueprint:
    """Few-shot generation prompt: task, guidelines, k demonstrations, target.

    Demonstration blocks are numbered 1..k and the target block k+1; with
    k=0 the prompt degenerates to zero-shot (guidelines + target only).
    """
    if k > 0 and pool is None:
        raise ValueError("k > 0 requires a demonstration pool")
    demos = select_demonstrations(pool, k, seed) if k > 0 else []
    guidelines = (
        "Guidelines:\n"
        "The comment should adhere to the following criteria:\n" + criteria_block()
    )
    sections: list[tuple[str, str]] = [
        ("gen_task", _REVIEWER_TASK),
        ("guidelines", guidelines),
    ]
    for i, (demo_code, demo_comment) in enumerate(demos, 1):
        sections.append(
            (
                f"demo_{i}",
                f"{i}. Code snippet:\n{demo_code}\n{i}. Comment:\n{demo_comment}",
            )
        )
    target_no = len(demos) + 1
    sections.append(
        ("target", f"{target_no}. Code snippet:\n{target_code}\n{target_no}. Comment:")
    )
    return PromptBlueprint(kind="reviewer", sections=tuple(sections))
