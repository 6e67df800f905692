"""Text-similarity metrics: BLEU-4, ROUGE-L, and ROUGE-L-based dedup.

These exist for comparison columns and duplicate removal only; the
harness's primary evaluation is criterion-based, not similarity-based.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from math import exp, log
from typing import Sequence

from .domain import CodeCommentPair

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on whitespace with punctuation isolated.

    Pure: the same text always yields the same tokens.
    """
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class SimilarityScore:
    """A similarity value in [0, 1] plus its component breakdown."""

    value: float
    metric: str  # "bleu4" | "rougeL_f1"
    components: dict = field(default_factory=dict)


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu4(candidate: Sequence[str], reference: Sequence[str]) -> SimilarityScore:
    """Geometric mean of clipped n-gram precisions (n=1..4) with brevity penalty.

    Add-one smoothing is applied to zero counts for n >= 2 so short
    comments do not collapse to 0; a zero unigram precision still yields 0.
    Orders above the candidate length are skipped.
    """
    if len(candidate) == 0:
        return SimilarityScore(0.0, "bleu4", {"reason": "empty candidate"})
    max_n = min(4, len(candidate))
    precisions = []
    for n in range(1, max_n + 1):
        cand_counts = _ngram_counts(candidate, n)
        ref_counts = _ngram_counts(reference, n)
        matched = sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
        total = sum(cand_counts.values())
        if matched == 0:
            if n == 1:
                return SimilarityScore(
                    0.0,
                    "bleu4",
                    {"precisions": [0.0], "smoothing": "add-one for n>=2"},
                )
            precisions.append(1.0 / (total + 1))  # add-one smoothing
        else:
            precisions.append(matched / total)
    if len(candidate) < len(reference):
        bp = exp(1 - len(reference) / len(candidate))
    else:
        bp = 1.0
    value = bp * exp(sum(log(p) for p in precisions) / len(precisions))
    return SimilarityScore(
        value,
        "bleu4",
        {
            "precisions": precisions,
            "brevity_penalty": bp,
            "smoothing": "add-one for n>=2",
        },
    )


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length, O(|a|*|b|) dynamic program."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, 1):
            if x == y:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rougeL_f1(candidate: Sequence[str], reference: Sequence[str]) -> SimilarityScore:
    """ROUGE-L F1: LCS-based precision/recall, harmonic mean (beta=1)."""
    if not candidate or not reference:
        return SimilarityScore(0.0, "rougeL_f1", {"reason": "empty side"})
    l = lcs_length(candidate, reference)
    if l == 0:
        return SimilarityScore(0.0, "rougeL_f1", {"lcs": 0, "precision": 0.0, "recall": 0.0})
    p = l / len(candidate)
    r = l / len(reference)
    return SimilarityScore(
        2 * p * r / (p + r), "rougeL_f1", {"lcs": l, "precision": p, "recall": r}
    )


@dataclass(frozen=True)
class DedupReport:
    threshold: float
    basis: str  # similarity computed on code, not comments
    dropped: list[tuple[str, str, float]]  # (dropped_id, kept_id, score)


def dedup_by_rougeL(
    corpus: Sequence[CodeCommentPair], threshold: float = 0.7
) -> tuple[list[CodeCommentPair], DedupReport]:
    """Greedy in-order dedup on code similarity.

    A unit is dropped iff its code's ROUGE-L F1 against any already-kept
    unit's code is >= threshold. The keep/drop scan is sequential so the
    result is deterministic in corpus order.
    """
    if not (0 < threshold <= 1):
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    kept: list[CodeCommentPair] = []
    kept_tokens: list[list[str]] = []
    dropped: list[tuple[str, str, float]] = []
    for pair in corpus:
        tokens = tokenize(pair.code)
        duplicate_of = None
        for other, other_tokens in zip(kept, kept_tokens):
            score = rougeL_f1(tokens, other_tokens).value
            if score >= threshold:
                duplicate_of = (other.id, score)
                break
        if duplicate_of is None:
            kept.append(pair)
            kept_tokens.append(tokens)
        else:
            dropped.append((pair.id, duplicate_of[0], duplicate_of[1]))
    return kept, DedupReport(threshold=threshold, basis="code", dropped=dropped)
