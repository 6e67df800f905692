"""Deterministic synthetic responder for fully offline end-to-end runs.

Given a rendered prompt, detects its family (judge, benchmark audit, or
reviewer) and fabricates a well-formed response whose content depends only
on the prompt text, so repeated runs are byte-identical.
"""

from __future__ import annotations

import hashlib
import re

from .domain import tie_average_ranks
from .prompts import RANKING_HEADER, SCORING_HEADER

_ALIAS_LINE = re.compile(r"^(model-\d+):$", re.MULTILINE)


def _scores_for(text: str) -> list[int]:
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return [1 + digest[i] % 10 for i in range(9)]


def _extract_comments(prompt: str) -> list[tuple[str, str]]:
    """Pull (alias, comment text) out of the objects section."""
    for marker in ("Comments from the models:", "Comment to evaluate:"):
        idx = prompt.find(marker)
        if idx != -1:
            block = prompt[idx + len(marker):]
            break
    else:
        raise ValueError("prompt has no comment block")
    # Cut at the next section delimiter line.
    block = block.split("\n###\n")[0]
    parts = _ALIAS_LINE.split(block)
    # parts: [pre, alias1, text1, alias2, text2, ...]
    out = []
    for i in range(1, len(parts) - 1, 2):
        out.append((parts[i], parts[i + 1].strip()))
    if not out:
        raise ValueError("no aliased comments found in prompt")
    return out


def _format_ranks(value: float) -> str:
    return f"{value:g}"


def synthetic_response(prompt: str) -> str:
    """Produce a deterministic response appropriate for the prompt family."""
    if SCORING_HEADER in prompt:
        comments = _extract_comments(prompt)
        scores = {alias: _scores_for(text) for alias, text in comments}
        scoring_rows = ",\n".join(
            f'    {{"model": "{alias}", "score": {scores[alias]}}}'
            for alias, _ in sorted(comments)
        )
        lines = [
            SCORING_HEADER,
            "[",
            scoring_rows,
            "]",
            "",
            "### Chain-of-Thoughts:",
            "Synthetic deterministic evaluation keyed to comment content.",
        ]
        if RANKING_HEADER in prompt:
            ranking = tie_average_ranks(
                [(alias, sum(s) / len(s)) for alias, s in scores.items()]
            )
            ranking_rows = ",\n".join(
                f'    {{"model": "{alias}", "rank": {_format_ranks(rank)}}}'
                for alias, rank in sorted(ranking.items())
            )
            lines += ["", RANKING_HEADER, "[", ranking_rows, "]"]
        return "\n".join(lines)
    # Reviewer prompt: fabricate a stable, recognizable comment.
    tag = hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:8]
    return (
        "The snippet contains a correctness risk around its main operation; "
        "validate inputs before use and handle the failure path explicitly. "
        f"(synthetic-review-{tag})"
    )
