"""Core vocabulary shared by every part of the harness.

Corpus units, the nine quality criteria, score vectors, annotation
records, generated comments, and judge verdicts. Everything here is an
immutable value object; construction either succeeds with a valid value
or raises, so downstream code never re-checks these invariants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Sequence

CRITERION_KEYS = ("C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C9")


@dataclass(frozen=True)
class Criterion:
    """One of the nine comment-quality criteria."""

    key: str
    name: str
    description: str


# Single source of truth for criterion names and descriptions. Prompt
# templates embed these verbatim; do not rephrase.
CRITERIA: tuple[Criterion, ...] = (
    Criterion("C1", "Readability", "Clear, easily understandable language."),
    Criterion("C2", "Relevance", "Directly related to the specific code."),
    Criterion("C3", "Explanation Clarity", "Clear elucidation of the issues identified."),
    Criterion("C4", "Problem Identification", "Accurate pinpointing and articulation of bugs."),
    Criterion("C5", "Actionability", "Practical advice for addressing identified issues."),
    Criterion("C6", "Completeness", "Coverage of all issues in the code for comprehensive review."),
    Criterion("C7", "Specificity", "Focus on specific code issues, avoiding generic statements."),
    Criterion("C8", "Contextual Adequacy", "Comments pointing out exact issue locations."),
    Criterion("C9", "Brevity", "Conciseness, conveying essential information without verbosity."),
)

CRITERIA_BY_KEY: Mapping[str, Criterion] = {c.key: c for c in CRITERIA}

SCORE_MIN = 1.0
SCORE_MAX = 10.0


def _round_score(x: float) -> float:
    # One-decimal storage precision; humans enter integers, LLM judges
    # occasionally emit decimals, and 0.1 granularity avoids spurious
    # disagreement from float noise.
    return round(float(x), 1)


@dataclass(frozen=True)
class QualityVector:
    """Nine criterion scores on the 1-10 scale, keyed C1..C9."""

    scores: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(
            self, "scores", {k: _round_score(v) for k, v in dict(self.scores).items()}
        )

    @classmethod
    def clamped(cls, scores: Mapping[str, float]) -> "QualityVector":
        """Build a vector with every score clamped into [1, 10]."""
        return cls({k: min(SCORE_MAX, max(SCORE_MIN, float(v))) for k, v in scores.items()})

    @classmethod
    def from_list(cls, values: Sequence[float]) -> "QualityVector":
        if len(values) != len(CRITERION_KEYS):
            raise ValueError(f"expected {len(CRITERION_KEYS)} scores, got {len(values)}")
        return cls(dict(zip(CRITERION_KEYS, values)))

    def as_list(self) -> list[float]:
        return [self.scores[k] for k in CRITERION_KEYS]

    def mean(self) -> float:
        """Unweighted mean of C1..C9 (the harness-local overall quality)."""
        return sum(self.as_list()) / len(CRITERION_KEYS)

    def __getitem__(self, key: str) -> float:
        return self.scores[key]


def validate_quality_vector(v: QualityVector) -> list[str]:
    """Return every violation of the nine-criterion 1-10 contract.

    Total function: never raises, an empty list means the vector is valid.
    """
    violations = []
    for key in CRITERION_KEYS:
        if key not in v.scores:
            violations.append(f"{key} missing")
            continue
        score = v.scores[key]
        if not math.isfinite(score):
            violations.append(f"{key} not finite")
        elif score < SCORE_MIN:
            violations.append(f"{key} below {SCORE_MIN:g}")
        elif score > SCORE_MAX:
            violations.append(f"{key} above {SCORE_MAX:g}")
    for key in v.scores:
        if key not in CRITERIA_BY_KEY:
            violations.append(f"unknown criterion {key}")
    return violations


class CommentCategory(str, Enum):
    CODE_IMPROVEMENT = "Code Improvement"
    UNDERSTANDING = "Understanding"
    SOCIAL_COMMUNICATION = "Social Communication"
    DEFECTS = "Defects"
    EXTERNAL_IMPACT = "External Impact"
    TESTING = "Testing"
    REVIEW_TOOL = "Review Tool"
    KNOWLEDGE_TRANSFER = "Knowledge Transfer"
    MISC = "Misc"
    MEANINGLESS_TEXT = "Meaningless Text"


class ToneLabel(str, Enum):
    INTERROGATIVE = "interrogative"
    DECLARATIVE = "declarative"


class ContextLabel(str, Enum):
    SELF_CONTAINED = "self-contained"
    NEEDS_EXTERNAL_CONTEXT = "needs-external-context"


@dataclass(frozen=True)
class SuitabilityFlags:
    """Per-record booleans derived by the analytics suitability rule.

    Never hand-set; see analytics.apply_suitability_rule.
    """

    quality_ok: bool
    category_ok: bool
    tone_ok: bool
    context_ok: bool

    @property
    def ideal(self) -> bool:
        return self.quality_ok and self.category_ok and self.tone_ok and self.context_ok


@dataclass(frozen=True)
class CodeCommentPair:
    """One corpus unit: a code snippet plus optional reference comment."""

    id: str
    dataset: str
    language: str
    code: str
    reference_comment: Optional[str] = None
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise ValueError("pair id must be nonempty")
        if not self.code:
            raise ValueError(f"pair {self.id!r}: code must be nonempty")


@dataclass(frozen=True)
class GeneratedComment:
    """One generator's comment for one corpus unit."""

    pair_id: str
    generator_id: str
    text: str
    usage: Optional[Mapping[str, int]] = None

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError(f"empty comment for pair {self.pair_id!r}")


@dataclass(frozen=True)
class AnnotationRecord:
    """One evaluator's labels for one corpus unit."""

    pair_id: str
    evaluator_id: str
    evaluator_kind: str  # "human" | "llm"
    quality: QualityVector
    # The single-comment LLM audit yields quality scores only, so the
    # categorical labels are optional for llm-kind records; human records
    # carry all three.
    category: Optional[CommentCategory] = None
    tone: Optional[ToneLabel] = None
    context: Optional[ContextLabel] = None
    elapsed_seconds: float = 0.0
    pass_tag: Optional[str] = None  # "ascending" | "descending", llm multi-comment passes only

    def __post_init__(self):
        if self.evaluator_kind not in ("human", "llm"):
            raise ValueError(f"bad evaluator_kind {self.evaluator_kind!r}")
        if self.elapsed_seconds < 0:
            raise ValueError("elapsed_seconds must be >= 0")
        if self.pass_tag is not None:
            if self.evaluator_kind != "llm":
                raise ValueError("pass_tag is only meaningful for llm records")
            if self.pass_tag not in ("ascending", "descending"):
                raise ValueError(f"bad pass_tag {self.pass_tag!r}")


def check_rank_law(ranking: Mapping[str, float], tol: float = 1e-9) -> bool:
    """True iff the ranks satisfy the tie-averaged-rank law.

    Sum of ranks must equal m(m+1)/2 and every rank must be >= 1.
    """
    m = len(ranking)
    if m == 0:
        return False
    if any(r < 1 - tol for r in ranking.values()):
        return False
    return abs(sum(ranking.values()) - m * (m + 1) / 2) <= tol


@dataclass(frozen=True)
class JudgeVerdict:
    """One judge pass over one case."""

    case_id: str
    model_scores: Mapping[str, QualityVector]
    cot: str
    ranking: Mapping[str, float]
    pass_tag: str
    raw_response: str

    def __post_init__(self):
        if set(self.ranking) != set(self.model_scores):
            raise ValueError("ranking keys must equal model_scores keys")
        if not check_rank_law(self.ranking):
            raise ValueError("ranking violates the tie-averaged-rank law")


def tie_average_ranks(ordering: Sequence[tuple[str, float]]) -> dict[str, float]:
    """Rank entries by quality, ties sharing the mean of their positions.

    Higher quality gets a numerically smaller rank. Equal qualities each
    receive the arithmetic mean of the positions they jointly occupy, so
    the rank sum is always m(m+1)/2.
    """
    if not ordering:
        raise ValueError("no models to rank")
    for name, quality in ordering:
        if not math.isfinite(quality):
            raise ValueError(f"non-finite quality for {name!r}")
    by_quality = sorted(ordering, key=lambda item: -item[1])
    ranks: dict[str, float] = {}
    i = 0
    while i < len(by_quality):
        j = i
        while j < len(by_quality) and by_quality[j][1] == by_quality[i][1]:
            j += 1
        # positions i+1 .. j occupied by this tie group
        mean_rank = (i + 1 + j) / 2
        for name, _ in by_quality[i:j]:
            ranks[name] = mean_rank
        i = j
    return ranks
