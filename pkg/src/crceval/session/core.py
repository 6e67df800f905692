"""Event-sourced human-evaluation sessions.

Every state change is an event appended durably before the caller gets an
acknowledgment; replaying a session's log reconstructs its state exactly,
which gives crash resilience and a complete timing audit trail. Timing
counts only active, case-open wall time (pauses are excluded) and comes
from an injected clock so tests are deterministic.
"""

from __future__ import annotations

import json
import os
import random
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

from ..domain import (
    CRITERION_KEYS,
    CommentCategory,
    ContextLabel,
    QualityVector,
    ToneLabel,
    check_rank_law,
    tie_average_ranks,
    validate_quality_vector,
)

KIND_AUDIT = "benchmark_audit"
KIND_COMPARISON = "model_comparison"


class SessionError(Exception):
    pass


class ValidationError(SessionError):
    def __init__(self, errors: dict[str, str]):
        super().__init__("; ".join(f"{k}: {v}" for k, v in errors.items()))
        self.errors = errors


@dataclass(frozen=True)
class CaseContent:
    """What a session shows for one case (resolved at creation time)."""

    case_id: str
    code: str
    # benchmark_audit: single reference comment; model_comparison: one per generator.
    reference_comment: Optional[str] = None
    comments: Mapping[str, str] = field(default_factory=dict)  # generator_id -> text


def ranks_from_positions(groups: Sequence[Sequence[str]]) -> dict[str, float]:
    """Convert ordered tie groups (best first) into tie-averaged ranks."""
    ordering = [(label, -i) for i, group in enumerate(groups) for label in group]
    return tie_average_ranks(ordering)


class EventLog:
    """Append-only JSONL event log; fsynced before acknowledgment."""

    def __init__(self, path: Optional[Path] = None):
        self.path = path
        self.events: list[dict] = []
        if path is not None and path.exists():
            with open(path, encoding="utf-8") as fh:
                self.events = [json.loads(line) for line in fh if line.strip()]

    def append(self, event: dict) -> None:
        self.events.append(event)
        if self.path is not None:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, ensure_ascii=False, sort_keys=True) + "\n")
                fh.flush()
                os.fsync(fh.fileno())


@dataclass
class SessionState:
    """Pure fold of a session's event log."""

    session_id: str = ""
    evaluator_id: str = ""
    kind: str = KIND_AUDIT
    token: str = ""
    case_order: list[str] = field(default_factory=list)
    alias_orders: dict[str, list[str]] = field(default_factory=dict)  # case -> alias seq
    alias_maps: dict[str, dict[str, str]] = field(default_factory=dict)  # case -> alias -> gid
    cursor: int = 0
    state: str = "active"  # active | paused | completed
    accumulated_seconds: dict[str, float] = field(default_factory=dict)
    case_open_since: Optional[float] = None
    submissions: dict[str, dict] = field(default_factory=dict)  # case_id -> stored record

    def apply(self, event: dict) -> None:
        etype = event["type"]
        if etype == "created":
            self.session_id = event["session_id"]
            self.evaluator_id = event["evaluator_id"]
            self.kind = event["kind"]
            self.token = event["token"]
            self.case_order = list(event["case_order"])
            self.alias_orders = {k: list(v) for k, v in event["alias_orders"].items()}
            self.alias_maps = {k: dict(v) for k, v in event["alias_maps"].items()}
            self.accumulated_seconds = {c: 0.0 for c in self.case_order}
        elif etype == "case_opened":
            self.case_open_since = event["at"]
        elif etype == "paused":
            self._bank_time(event["at"])
            self.state = "paused"
        elif etype == "resumed":
            self.state = "active"
            # The pending case's timer restarts on the next case_opened event.
        elif etype == "submitted":
            self._bank_time(event["at"])
            self.submissions[event["case_id"]] = event["record"]
            self.cursor += 1
            if self.cursor >= len(self.case_order):
                self.state = "completed"
        else:
            raise SessionError(f"unknown event type {etype!r}")

    def _bank_time(self, at: float) -> None:
        if self.case_open_since is not None and self.cursor < len(self.case_order):
            case_id = self.case_order[self.cursor]
            self.accumulated_seconds[case_id] += max(0.0, at - self.case_open_since)
        self.case_open_since = None

    @property
    def current_case(self) -> Optional[str]:
        if self.cursor < len(self.case_order):
            return self.case_order[self.cursor]
        return None


def replay(events: Sequence[dict]) -> SessionState:
    state = SessionState()
    for event in events:
        state.apply(event)
    return state


class SessionService:
    """Command side of the session store.

    One lock per session serializes its requests; different sessions are
    fully concurrent. Submits are idempotent by (session, case).
    """

    def __init__(
        self,
        cases: Mapping[str, CaseContent],
        log_dir: Optional[str | Path] = None,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.cases = dict(cases)
        self.log_dir = Path(log_dir) if log_dir else None
        if self.log_dir:
            self.log_dir.mkdir(parents=True, exist_ok=True)
        self.clock = clock
        self._logs: dict[str, EventLog] = {}
        self._states: dict[str, SessionState] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._global_lock = threading.Lock()
        if self.log_dir:
            for path in sorted(self.log_dir.glob("*.events.jsonl")):
                log = EventLog(path)
                if log.events:
                    state = replay(log.events)
                    self._logs[state.session_id] = log
                    self._states[state.session_id] = state
                    self._locks[state.session_id] = threading.Lock()

    # -- helpers ----------------------------------------------------------

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._global_lock:
            if session_id not in self._locks:
                raise SessionError(f"unknown session {session_id!r}")
            return self._locks[session_id]

    def _append(self, session_id: str, event: dict) -> None:
        self._logs[session_id].append(event)
        self._states[session_id].apply(event)

    def state_of(self, session_id: str) -> SessionState:
        if session_id not in self._states:
            raise SessionError(f"unknown session {session_id!r}")
        return self._states[session_id]

    def events_of(self, session_id: str) -> list[dict]:
        return list(self._logs[session_id].events)

    # -- commands ---------------------------------------------------------

    def create_session(
        self,
        evaluator_id: str,
        kind: str,
        case_ids: Sequence[str],
        seed: int,
        session_id: Optional[str] = None,
    ) -> SessionState:
        if kind not in (KIND_AUDIT, KIND_COMPARISON):
            raise SessionError(f"unknown session kind {kind!r}")
        if not case_ids:
            raise SessionError("case list is empty")
        unknown = [c for c in case_ids if c not in self.cases]
        if unknown:
            raise SessionError(f"unknown case ids: {unknown}")
        session_id = session_id or secrets.token_hex(8)
        # Case presentation order is seeded-shuffled and fixed at creation.
        order = list(case_ids)
        random.Random(seed).shuffle(order)
        alias_orders: dict[str, list[str]] = {}
        alias_maps: dict[str, dict[str, str]] = {}
        if kind == KIND_COMPARISON:
            for case_id in order:
                generator_ids = sorted(self.cases[case_id].comments)
                if len(generator_ids) < 2:
                    raise SessionError(f"case {case_id!r} has fewer than 2 comments")
                aliases = [f"model-{i}" for i in range(1, len(generator_ids) + 1)]
                alias_maps[case_id] = dict(zip(aliases, generator_ids))
                # Independent per-case display shuffle to counter positional bias.
                display = list(aliases)
                random.Random((seed, case_id).__repr__()).shuffle(display)
                alias_orders[case_id] = display
        event = {
            "type": "created",
            "session_id": session_id,
            "evaluator_id": evaluator_id,
            "kind": kind,
            "token": secrets.token_hex(16),
            "case_order": order,
            "alias_orders": alias_orders,
            "alias_maps": alias_maps,
        }
        with self._global_lock:
            if session_id in self._states:
                raise SessionError(f"session {session_id!r} already exists")
            path = self.log_dir / f"{session_id}.events.jsonl" if self.log_dir else None
            self._logs[session_id] = EventLog(path)
            self._states[session_id] = SessionState()
            self._locks[session_id] = threading.Lock()
        self._append(session_id, event)
        return self.state_of(session_id)

    def next_case(self, session_id: str) -> Optional[dict]:
        """The current case view, or None when the session is done.

        Opens (or re-opens after resume) the case timer.
        """
        with self._lock_for(session_id):
            state = self.state_of(session_id)
            if state.state == "paused":
                raise SessionError("session is paused")
            if state.state == "completed" or state.current_case is None:
                return None
            case_id = state.current_case
            if state.case_open_since is None:
                self._append(session_id, {"type": "case_opened", "at": self.clock()})
            content = self.cases[case_id]
            view = {
                "case_id": case_id,
                "kind": state.kind,
                "code": content.code,
                "position": state.cursor + 1,
                "total": len(state.case_order),
                "accumulated_seconds": state.accumulated_seconds[case_id],
            }
            if state.kind == KIND_AUDIT:
                view["comment"] = content.reference_comment
            else:
                alias_map = state.alias_maps[case_id]
                view["comments"] = [
                    {"label": alias, "text": content.comments[alias_map[alias]]}
                    for alias in state.alias_orders[case_id]
                ]
            return view

    def submit(self, session_id: str, case_id: str, payload: dict) -> dict:
        """Validate and durably record one case's labels; advances the cursor."""
        with self._lock_for(session_id):
            state = self.state_of(session_id)
            if case_id in state.submissions:
                # Idempotent retry after a crash between append and ack.
                return state.submissions[case_id]
            if state.state != "active":
                raise SessionError(f"session is {state.state}")
            if state.current_case != case_id:
                raise SessionError(
                    f"out-of-order submit: expected {state.current_case!r}, got {case_id!r}"
                )
            record = self._validate_payload(state, case_id, payload)
            at = self.clock()
            elapsed = state.accumulated_seconds[case_id]
            if state.case_open_since is not None:
                elapsed += max(0.0, at - state.case_open_since)
            record["elapsed_seconds"] = elapsed
            self._append(
                session_id,
                {"type": "submitted", "case_id": case_id, "at": at, "record": record},
            )
            return record

    def _validate_payload(self, state: SessionState, case_id: str, payload: dict) -> dict:
        errors: dict[str, str] = {}
        if state.kind == KIND_AUDIT:
            quality = self._check_quality(payload.get("quality"), "quality", errors)
            category = self._check_enum(payload.get("category"), CommentCategory, "category", errors)
            tone = self._check_enum(payload.get("tone"), ToneLabel, "tone", errors)
            context = self._check_enum(payload.get("context"), ContextLabel, "context", errors)
            if errors:
                raise ValidationError(errors)
            return {
                "pair_id": case_id,
                "evaluator_id": state.evaluator_id,
                "evaluator_kind": "human",
                "quality": quality.as_list(),
                "category": category.value,
                "tone": tone.value,
                "context": context.value,
            }
        aliases = set(state.alias_maps[case_id])
        scores_in = payload.get("scores") or {}
        if set(scores_in) != aliases:
            errors["scores"] = f"expected scores for exactly {sorted(aliases)}"
        quality_by_alias = {}
        for alias in sorted(set(scores_in) & aliases):
            vector = self._check_quality(scores_in[alias], f"scores.{alias}", errors)
            if vector is not None:
                quality_by_alias[alias] = vector
        ranking_in = payload.get("ranking") or {}
        if set(ranking_in) != aliases:
            errors["ranking"] = f"expected ranks for exactly {sorted(aliases)}"
        else:
            try:
                ranking = {a: float(r) for a, r in ranking_in.items()}
            except (TypeError, ValueError):
                errors["ranking"] = "ranks must be numeric"
            else:
                if not check_rank_law(ranking):
                    errors["ranking"] = (
                        "ranks violate the tie-averaged-rank law "
                        "(rank sum must be m(m+1)/2, every rank >= 1)"
                    )
        if errors:
            raise ValidationError(errors)
        alias_map = state.alias_maps[case_id]
        return {
            "pair_id": case_id,
            "evaluator_id": state.evaluator_id,
            "evaluator_kind": "human",
            "model_scores": {
                alias_map[a]: quality_by_alias[a].as_list() for a in sorted(aliases)
            },
            "ranking": {alias_map[a]: float(ranking_in[a]) for a in sorted(aliases)},
        }

    @staticmethod
    def _check_quality(raw, field_name: str, errors: dict[str, str]):
        if not isinstance(raw, dict):
            errors[field_name] = "must be a map of C1..C9 to scores"
            return None
        try:
            vector = QualityVector({str(k): float(v) for k, v in raw.items()})
        except (TypeError, ValueError):
            errors[field_name] = "scores must be numeric"
            return None
        violations = validate_quality_vector(vector)
        if violations:
            errors[field_name] = "; ".join(violations)
            return None
        return vector

    @staticmethod
    def _check_enum(raw, enum_cls, field_name: str, errors: dict[str, str]):
        try:
            return enum_cls(raw)
        except ValueError:
            valid = ", ".join(e.value for e in enum_cls)
            errors[field_name] = f"must be one of: {valid}"
            return None

    def pause(self, session_id: str) -> str:
        with self._lock_for(session_id):
            state = self.state_of(session_id)
            if state.state != "active":
                raise SessionError(f"cannot pause a {state.state} session")
            self._append(session_id, {"type": "paused", "at": self.clock()})
            return self.state_of(session_id).state

    def resume(self, session_id: str) -> str:
        with self._lock_for(session_id):
            state = self.state_of(session_id)
            if state.state != "paused":
                raise SessionError(f"cannot resume a {state.state} session")
            self._append(session_id, {"type": "resumed", "at": self.clock()})
            return self.state_of(session_id).state

    def export(self, session_id: str) -> list[dict]:
        """Per-case annotation records with elapsed times, in case order."""
        state = self.state_of(session_id)
        return [
            state.submissions[case_id]
            for case_id in state.case_order
            if case_id in state.submissions
        ]
