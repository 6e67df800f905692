"""Deterministic rendering of analytics products into report files.

Rendering is a pure function of the bundle: stable orderings (generators
by aggregated rank, criteria C1..C9, region keys lexicographic) and fixed
display precisions (scores/ranks 0.01, fractions 0.1%, currency $0.01).
Full precision stays in the run store; only display output is rounded.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .analytics import AgreementReport, EfficiencyCell, VennSummary
from .domain import CRITERION_KEYS, CommentCategory
from .engine import CaseResult
from .gateway import round_cents


@dataclass
class ReportBundle:
    scoring: Optional[Mapping[str, Mapping[str, float]]] = None  # generator -> criterion -> mean
    ranking: Optional[Mapping[str, float]] = None  # generator -> mean aggregated rank
    quality_means: Optional[Mapping[str, float]] = None  # criterion -> mean audit score
    low_quality: Optional[Mapping[str, float]] = None  # criterion -> fraction below cut
    categories: Optional[Mapping[CommentCategory, float]] = None
    agreement: Optional[AgreementReport] = None
    efficiency: Optional[Mapping[tuple[str, str], EfficiencyCell]] = None
    venn: Optional[VennSummary] = None
    metadata: dict = field(default_factory=dict)


def bundle_from_results(
    results: Sequence[CaseResult], metadata: Optional[dict] = None
) -> ReportBundle:
    """Scoring/ranking tables: per-generator means over aggregated case results."""
    if not results:
        raise ValueError("no case results")
    generators = sorted(results[0].scores)
    scoring = {
        gid: {
            key: sum(r.scores[gid][key] for r in results) / len(results)
            for key in CRITERION_KEYS
        }
        for gid in generators
    }
    ranking = {gid: sum(r.ranks[gid] for r in results) / len(results) for gid in generators}
    return ReportBundle(scoring=scoring, ranking=ranking, metadata=dict(metadata or {}))


_ALL_TABLES = (
    "scoring",
    "ranking",
    "quality",
    "categories",
    "agreement",
    "efficiency",
    "venn",
)


def _fmt_score(x: float) -> str:
    return f"{x:.2f}"


def _fmt_fraction(x: float) -> str:
    return f"{x * 100:.1f}%"


def _fmt_currency(x: float) -> str:
    return f"{round_cents(x):.2f}"


def _generator_order(bundle: ReportBundle) -> list[str]:
    assert bundle.scoring is not None
    if bundle.ranking:
        return sorted(bundle.scoring, key=lambda g: (bundle.ranking[g], g))
    return sorted(bundle.scoring)


def _table_rows(bundle: ReportBundle, table: str) -> tuple[list[str], list[list[str]]]:
    if table == "scoring":
        header = ["generator"] + list(CRITERION_KEYS)
        rows = [
            [gid] + [_fmt_score(bundle.scoring[gid][key]) for key in CRITERION_KEYS]
            for gid in _generator_order(bundle)
        ]
    elif table == "ranking":
        header = ["generator", "mean_rank"]
        rows = [
            [gid, _fmt_score(rank)]
            for gid, rank in sorted(bundle.ranking.items(), key=lambda kv: (kv[1], kv[0]))
        ]
    elif table == "quality":
        header = ["criterion", "mean_score", "low_quality_fraction"]
        rows = [
            [
                key,
                _fmt_score(bundle.quality_means[key]),
                _fmt_fraction(bundle.low_quality[key]),
            ]
            for key in CRITERION_KEYS
        ]
    elif table == "categories":
        header = ["category", "fraction"]
        rows = [
            [category.value, _fmt_fraction(bundle.categories[category])]
            for category in CommentCategory
        ]
    elif table == "agreement":
        header = ["criterion", "human_vs_reference", "llm_vs_reference"]
        rows = [
            [
                key,
                _fmt_score(bundle.agreement.per_criterion[key][0]),
                _fmt_score(bundle.agreement.per_criterion[key][1]),
            ]
            for key in CRITERION_KEYS
        ]
    elif table == "efficiency":
        header = ["task", "evaluator", "mean_seconds", "mean_cost"]
        rows = [
            [task, kind, _fmt_score(cell.mean_seconds), _fmt_currency(cell.mean_cost)]
            for (task, kind), cell in sorted(bundle.efficiency.items())
        ]
    elif table == "venn":
        header = ["region_qctx", "count"]
        rows = [[key, str(count)] for key, count in sorted(bundle.venn.regions.items())]
        rows.append(["ideal_fraction", _fmt_fraction(bundle.venn.ideal_fraction)])
    else:
        raise ValueError(f"unknown table {table!r}")
    return header, rows


def _present(bundle: ReportBundle, table: str) -> bool:
    return {
        "scoring": bundle.scoring is not None,
        "ranking": bundle.ranking is not None,
        "quality": bundle.quality_means is not None and bundle.low_quality is not None,
        "categories": bundle.categories is not None,
        "agreement": bundle.agreement is not None,
        "efficiency": bundle.efficiency is not None,
        "venn": bundle.venn is not None,
    }[table]


def render(
    bundle: ReportBundle,
    out_dir: str | Path,
    format: str = "csv",
    tables: Optional[Sequence[str]] = None,
) -> list[Path]:
    """Write one file per table; byte-deterministic for identical bundles."""
    if format not in ("csv", "jsonl", "txt"):
        raise ValueError(f"unknown format {format!r}")
    requested = list(tables) if tables else [t for t in _ALL_TABLES if _present(bundle, t)]
    missing = [t for t in requested if not _present(bundle, t)]
    if missing:
        raise ValueError(f"bundle is missing requested tables: {', '.join(missing)}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for table in requested:
        header, rows = _table_rows(bundle, table)
        path = out_dir / f"{table}.{format}"
        if format == "csv":
            buffer = io.StringIO()
            writer = csv.writer(buffer, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
            path.write_text(buffer.getvalue(), encoding="utf-8")
        elif format == "jsonl":
            lines = [
                json.dumps(dict(zip(header, row)), ensure_ascii=False, sort_keys=True)
                for row in rows
            ]
            path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        else:
            widths = [
                max(len(header[i]), *(len(row[i]) for row in rows)) if rows else len(header[i])
                for i in range(len(header))
            ]

            def line(cells: list[str]) -> str:
                return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()

            body = [line(header), line(["-" * w for w in widths])] + [line(r) for r in rows]
            path.write_text("\n".join(body) + "\n", encoding="utf-8")
        written.append(path)
    meta_path = out_dir / "metadata.json"
    meta_path.write_text(
        json.dumps(bundle.metadata, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    written.append(meta_path)
    return written
