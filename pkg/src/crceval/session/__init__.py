from .core import (
    KIND_AUDIT,
    KIND_COMPARISON,
    CaseContent,
    EventLog,
    SessionError,
    SessionService,
    SessionState,
    ValidationError,
    ranks_from_positions,
    replay,
)

__all__ = [
    "KIND_AUDIT",
    "KIND_COMPARISON",
    "CaseContent",
    "EventLog",
    "SessionError",
    "SessionService",
    "SessionState",
    "ValidationError",
    "ranks_from_positions",
    "replay",
]
