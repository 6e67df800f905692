"""Aggregate statistics over annotation records and cost ledgers.

Inter-rater agreement (ICC), low-quality fractions, category
distributions, 4-flag suitability Venn regions, and time/cost means.
All functions are pure aggregations over immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .domain import (
    CRITERION_KEYS,
    AnnotationRecord,
    CommentCategory,
    ContextLabel,
    SuitabilityFlags,
    ToneLabel,
)
from .gateway import CostLedger

ICC_VARIANT = "ICC(2,1): two-way random, absolute agreement, single measure"


def icc_vs_reference(candidate: Sequence[float], reference: Sequence[float]) -> float:
    """Agreement between a candidate score series and a reference series.

    Two-way random, absolute-agreement, single-measure ICC over the
    two-column (candidate, reference) table: k=2 raters, n subjects,
    (MSR - MSE) / (MSR + (k-1)MSE + k(MSC - MSE)/n).

    Identical constant columns are defined as 1.0 by continuity; any other
    zero-denominator table is an error.
    """
    if len(candidate) != len(reference):
        raise ValueError("series lengths differ")
    n = len(candidate)
    if n < 2:
        raise ValueError("need at least 2 subjects")
    k = 2
    table = [(float(c), float(r)) for c, r in zip(candidate, reference)]
    grand = sum(c + r for c, r in table) / (n * k)
    row_means = [(c + r) / 2 for c, r in table]
    col_means = [sum(c for c, _ in table) / n, sum(r for _, r in table) / n]
    ssr = k * sum((rm - grand) ** 2 for rm in row_means)
    ssc = n * sum((cm - grand) ** 2 for cm in col_means)
    sst = sum((x - grand) ** 2 for c, r in table for x in (c, r))
    sse = max(0.0, sst - ssr - ssc)
    msr = ssr / (n - 1)
    msc = ssc / (k - 1)
    mse = sse / ((n - 1) * (k - 1))
    denominator = msr + (k - 1) * mse + k * (msc - mse) / n
    if denominator == 0:
        if all(c == r == table[0][0] for c, r in table):
            return 1.0
        raise ValueError("degenerate variance")
    return (msr - mse) / denominator


@dataclass(frozen=True)
class AgreementReport:
    per_criterion: Mapping[str, tuple[float, float]]  # key -> (human_vs_ref, llm_vs_ref)
    subject_count: int
    icc_variant: str = ICC_VARIANT
    notes: tuple[str, ...] = ()


def _series_by_evaluator(
    records: Sequence[AnnotationRecord], kind: str, subjects: Sequence[str], key: str
) -> dict[str, list[float]]:
    by_evaluator: dict[str, dict[str, float]] = {}
    for record in records:
        if record.evaluator_kind != kind:
            continue
        by_evaluator.setdefault(record.evaluator_id, {})[record.pair_id] = record.quality[key]
    out = {}
    for evaluator, scores in by_evaluator.items():
        if set(scores) != set(subjects):
            raise ValueError(
                f"missing coverage: evaluator {evaluator!r} lacks subjects "
                f"{sorted(set(subjects) - set(scores))}"
            )
        out[evaluator] = [scores[s] for s in subjects]
    return out


def agreement_table(records: Sequence[AnnotationRecord]) -> AgreementReport:
    """Per-criterion ICC of humans and LLMs against the mean-human reference.

    The human entry is the mean over human evaluators of each evaluator's
    ICC against the reference (mean-over-evaluators reading); likewise for
    multiple LLM evaluators.
    """
    subjects = sorted({r.pair_id for r in records})
    if not subjects:
        raise ValueError("no records")
    kinds = {r.pair_id: {r2.evaluator_kind for r2 in records if r2.pair_id == r.pair_id} for r in records}
    for subject, present in kinds.items():
        if present != {"human", "llm"}:
            raise ValueError(f"subject {subject!r} lacks human or llm records")
    per_criterion = {}
    notes: list[str] = []
    for key in CRITERION_KEYS:
        humans = _series_by_evaluator(records, "human", subjects, key)
        llms = _series_by_evaluator(records, "llm", subjects, key)
        reference = [
            sum(series[i] for series in humans.values()) / len(humans)
            for i in range(len(subjects))
        ]

        def mean_icc(group: dict[str, list[float]]) -> float:
            values = []
            for evaluator, series in sorted(group.items()):
                if series == reference and len(set(series)) == 1:
                    notes.append(
                        f"{key}: identical constant columns for {evaluator!r}; "
                        "ICC 1.0 by continuity"
                    )
                values.append(icc_vs_reference(series, reference))
            return sum(values) / len(values)

        per_criterion[key] = (mean_icc(humans), mean_icc(llms))
    return AgreementReport(
        per_criterion=per_criterion, subject_count=len(subjects), notes=tuple(notes)
    )


def low_quality_fractions(
    records: Sequence[AnnotationRecord], threshold: float = 6.0
) -> dict[str, float]:
    """Per criterion, the fraction of records scoring strictly below threshold."""
    if not records:
        raise ValueError("no records")
    return {
        key: sum(1 for r in records if r.quality[key] < threshold) / len(records)
        for key in CRITERION_KEYS
    }


def category_distribution(
    records: Sequence[AnnotationRecord],
) -> dict[CommentCategory, float]:
    """Fraction of records per category; fractions sum to 1."""
    labeled = [r for r in records if r.category is not None]
    if not labeled:
        raise ValueError("no categorized records")
    return {
        category: sum(1 for r in labeled if r.category == category) / len(labeled)
        for category in CommentCategory
    }


@dataclass(frozen=True)
class SuitabilityRule:
    """Deterministic mapping from an annotation to its four suitability flags."""

    quality_threshold: float = 6.0
    suitable_categories: frozenset = frozenset(
        {CommentCategory.CODE_IMPROVEMENT, CommentCategory.DEFECTS}
    )
    suitable_tone: ToneLabel = ToneLabel.DECLARATIVE
    suitable_context: ContextLabel = ContextLabel.SELF_CONTAINED

    def apply(self, record: AnnotationRecord) -> SuitabilityFlags:
        # Missing categorical labels (llm audit records) cannot be judged
        # suitable; the flag stays False.
        return SuitabilityFlags(
            quality_ok=record.quality.mean() >= self.quality_threshold,
            category_ok=record.category in self.suitable_categories,
            tone_ok=record.tone == self.suitable_tone,
            context_ok=record.context == self.suitable_context,
        )


@dataclass(frozen=True)
class VennSummary:
    # Region keys are 4-char T/F strings in quality/category/tone/context order.
    regions: Mapping[str, int]
    ideal_fraction: float
    rule: SuitabilityRule
    total: int


def venn_suitability(
    records: Sequence[AnnotationRecord], rule: SuitabilityRule | None = None
) -> VennSummary:
    """Count records in each of the 16 suitability-flag combinations."""
    if not records:
        raise ValueError("no records")
    rule = rule or SuitabilityRule()
    regions = {
        f"{q}{c}{t}{x}": 0
        for q in "TF"
        for c in "TF"
        for t in "TF"
        for x in "TF"
    }
    ideal = 0
    for record in records:
        flags = rule.apply(record)
        key = "".join(
            "T" if ok else "F"
            for ok in (flags.quality_ok, flags.category_ok, flags.tone_ok, flags.context_ok)
        )
        regions[key] += 1
        if flags.ideal:
            ideal += 1
    return VennSummary(
        regions=regions, ideal_fraction=ideal / len(records), rule=rule, total=len(records)
    )


@dataclass(frozen=True)
class EfficiencyCell:
    mean_seconds: float
    mean_cost: float
    entry_count: int


def efficiency_summary(
    ledger: CostLedger,
    groups: Sequence[tuple[str, str]] = (
        ("single_comment", "human"),
        ("single_comment", "llm"),
        ("comparison", "human"),
        ("comparison", "llm"),
    ),
) -> dict[tuple[str, str], EfficiencyCell]:
    """Mean wall time and cost per case for each (task, evaluator) group."""
    out = {}
    entries = ledger.entries
    for task, kind in groups:
        matching = [e for e in entries if e.task == task and e.evaluator_kind == kind]
        if not matching:
            raise ValueError(f"no ledger entries for group ({task}, {kind})")
        out[(task, kind)] = EfficiencyCell(
            mean_seconds=sum(e.wall_seconds for e in matching) / len(matching),
            mean_cost=sum(e.cost for e in matching) / len(matching),
            entry_count=len(matching),
        )
    return out
