"""Corpus ingestion, sampling, and persistence.

Canonical on-disk format: UTF-8 JSON Lines, one record per line with the
schema {id, dataset, language, code, reference_comment?, metadata?}.
Source datasets with other schemas are mapped through field adapters
recorded in the manifest.
"""

from __future__ import annotations

import datetime as _dt
import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .domain import CodeCommentPair


@dataclass(frozen=True)
class RejectedRecord:
    line_number: int
    reason: str
    raw: str


@dataclass
class CorpusManifest:
    name: str
    sources: list[str]
    unit_count: int
    created_at: str
    sampling_seed: Optional[int] = None
    dedup: Optional[dict] = None
    field_map: Optional[Mapping[str, str]] = None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "sources": self.sources,
            "unit_count": self.unit_count,
            "created_at": self.created_at,
            "sampling_seed": self.sampling_seed,
            "dedup": self.dedup,
            "field_map": dict(self.field_map) if self.field_map else None,
        }


def _now_iso() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _pair_from_record(
    record: dict, field_map: Optional[Mapping[str, str]] = None
) -> CodeCommentPair:
    if field_map:
        record = {field_map.get(k, k): v for k, v in record.items()}
    known = {"id", "dataset", "language", "code", "reference_comment", "metadata"}
    extra = {k: v for k, v in record.items() if k not in known}
    metadata = dict(record.get("metadata") or {})
    metadata.update({k: str(v) for k, v in extra.items()})
    return CodeCommentPair(
        id=str(record.get("id", "")),
        dataset=str(record.get("dataset", "")),
        language=str(record.get("language", "")),
        code=record.get("code") or "",
        reference_comment=record.get("reference_comment"),
        metadata=metadata,
    )


def load_corpus(
    path: str | Path,
    format: str = "jsonl",
    field_map: Optional[Mapping[str, str]] = None,
    name: Optional[str] = None,
) -> tuple[list[CodeCommentPair], CorpusManifest, list[RejectedRecord]]:
    """Load a corpus, collecting malformed records instead of dropping them.

    Raises on an unreadable path or when zero valid records remain.
    """
    path = Path(path)
    if format == "jsonl":
        files = [path]
    elif format == "directory-of-files":
        if not path.is_dir():
            raise FileNotFoundError(f"not a directory: {path}")
        files = sorted(p for p in path.iterdir() if p.suffix == ".jsonl")
    else:
        raise ValueError(f"unknown corpus format {format!r}")

    pairs: list[CodeCommentPair] = []
    rejects: list[RejectedRecord] = []
    seen_ids: set[str] = set()
    for file in files:
        with open(file, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    rejects.append(RejectedRecord(lineno, f"invalid json: {exc}", line))
                    continue
                try:
                    pair = _pair_from_record(record, field_map)
                except (ValueError, TypeError) as exc:
                    rejects.append(RejectedRecord(lineno, str(exc), line))
                    continue
                if pair.id in seen_ids:
                    rejects.append(RejectedRecord(lineno, f"duplicate id {pair.id!r}", line))
                    continue
                seen_ids.add(pair.id)
                pairs.append(pair)
    if not pairs:
        raise ValueError(f"zero valid records in {path}")
    manifest = CorpusManifest(
        name=name or path.stem,
        sources=[str(f) for f in files],
        unit_count=len(pairs),
        created_at=_now_iso(),
        field_map=field_map,
    )
    return pairs, manifest, rejects


def store_corpus(pairs: Iterable[CodeCommentPair], path: str | Path) -> None:
    """Write pairs in the canonical JSONL schema (stable key order)."""
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            record = {
                "id": pair.id,
                "dataset": pair.dataset,
                "language": pair.language,
                "code": pair.code,
            }
            if pair.reference_comment is not None:
                record["reference_comment"] = pair.reference_comment
            if pair.metadata:
                record["metadata"] = dict(pair.metadata)
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


def sample_corpus(
    corpus: Sequence[CodeCommentPair], n: int, seed: int, name: str = "sample"
) -> tuple[list[CodeCommentPair], CorpusManifest]:
    """Uniform sample without replacement, reproducible under (order, seed).

    PRNG: Python's Mersenne Twister (random.Random) with integer seeding;
    selection via random.Random.sample over corpus positions. The seed is
    recorded in the manifest.
    """
    if not 1 <= n <= len(corpus):
        raise ValueError(f"sample size {n} out of range for corpus of {len(corpus)}")
    rng = random.Random(seed)
    positions = sorted(rng.sample(range(len(corpus)), n))
    sampled = [corpus[i] for i in positions]
    manifest = CorpusManifest(
        name=name,
        sources=[],
        unit_count=n,
        created_at=_now_iso(),
        sampling_seed=seed,
    )
    return sampled, manifest


def margin_of_error(p: float, n: int, confidence: float = 0.95) -> float:
    """Half-width of the normal-approximation confidence interval.

    z * sqrt(p(1-p)/n), with z = 1.96 for 95% confidence (the only
    supported level).
    """
    if not 0 <= p <= 1:
        raise ValueError(f"proportion must be in [0, 1], got {p}")
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    if confidence != 0.95:
        raise ValueError("only 95% confidence is supported")
    z = 1.96
    return z * math.sqrt(p * (1 - p) / n)
