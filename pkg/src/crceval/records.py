"""JSONL (de)serialization of annotation records and generated comments."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

from .domain import (
    AnnotationRecord,
    CommentCategory,
    ContextLabel,
    GeneratedComment,
    QualityVector,
    ToneLabel,
)


def annotation_to_dict(record: AnnotationRecord) -> dict:
    return {
        "pair_id": record.pair_id,
        "evaluator_id": record.evaluator_id,
        "evaluator_kind": record.evaluator_kind,
        "quality": record.quality.as_list(),
        "category": record.category.value if record.category else None,
        "tone": record.tone.value if record.tone else None,
        "context": record.context.value if record.context else None,
        "elapsed_seconds": record.elapsed_seconds,
        "pass_tag": record.pass_tag,
    }


def annotation_from_dict(data: dict) -> AnnotationRecord:
    return AnnotationRecord(
        pair_id=data["pair_id"],
        evaluator_id=data["evaluator_id"],
        evaluator_kind=data["evaluator_kind"],
        quality=QualityVector.from_list([float(x) for x in data["quality"]]),
        category=CommentCategory(data["category"]) if data.get("category") else None,
        tone=ToneLabel(data["tone"]) if data.get("tone") else None,
        context=ContextLabel(data["context"]) if data.get("context") else None,
        elapsed_seconds=float(data.get("elapsed_seconds", 0.0)),
        pass_tag=data.get("pass_tag"),
    )


def save_annotations(records: Sequence[AnnotationRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(annotation_to_dict(record), ensure_ascii=False, sort_keys=True) + "\n")


def load_annotations(path: str | Path) -> list[AnnotationRecord]:
    with open(path, encoding="utf-8") as fh:
        return [annotation_from_dict(json.loads(line)) for line in fh if line.strip()]


def save_comments(comments: Iterable[GeneratedComment], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for comment in comments:
            record = {
                "pair_id": comment.pair_id,
                "generator_id": comment.generator_id,
                "text": comment.text,
                "usage": dict(comment.usage) if comment.usage else None,
            }
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


def load_comments(path: str | Path) -> list[GeneratedComment]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            data = json.loads(line)
            out.append(
                GeneratedComment(
                    pair_id=data["pair_id"],
                    generator_id=data["generator_id"],
                    text=data["text"],
                    usage=data.get("usage"),
                )
            )
    return out


def comments_by_case(
    comment_sets: Sequence[Sequence[GeneratedComment]],
) -> dict[str, list[tuple[str, str]]]:
    """Merge comment files into per-case (generator_id, text) lists."""
    merged: dict[str, list[tuple[str, str]]] = {}
    seen: set[tuple[str, str]] = set()
    for comments in comment_sets:
        for comment in comments:
            key = (comment.pair_id, comment.generator_id)
            if key in seen:
                raise ValueError(f"duplicate comment for {key}")
            seen.add(key)
            merged.setdefault(comment.pair_id, []).append(
                (comment.generator_id, comment.text)
            )
    return merged
