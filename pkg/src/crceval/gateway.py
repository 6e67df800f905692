"""Provider-agnostic chat-completion access.

Retry with exponential backoff, token-bucket rate limiting, token/cost
accounting in an append-only ledger, and deterministic mock providers so
the whole harness runs offline.
"""

from __future__ import annotations

import hashlib
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Callable, Optional, Protocol

import httpx

API_KEY_ENV = "CRCEVAL_API_KEY"

DEFAULT_TEMPERATURE = 0.1
DEFAULT_MAX_TOKENS = 8192


class GatewayError(Exception):
    pass


class AuthError(GatewayError):
    """Non-retryable: missing or rejected credential."""


class TransientProviderError(GatewayError):
    """Retryable: timeouts, connection drops, 429s, 5xx."""


class RetryBudgetExhausted(GatewayError):
    pass


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    model: str = "mock"
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS
    request_id: str = field(default_factory=lambda: uuid.uuid4().hex)

    def __post_init__(self):
        if not 0 <= self.temperature <= 2:
            raise ValueError(f"temperature must be in [0, 2], got {self.temperature}")


@dataclass(frozen=True)
class CompletionResult:
    text: str
    input_tokens: int
    output_tokens: int
    latency_seconds: float
    provider: str
    truncated: bool = False
    tokens_estimated: bool = False

    def __post_init__(self):
        if self.input_tokens < 0 or self.output_tokens < 0:
            raise ValueError("token counts must be >= 0")
        if self.latency_seconds < 0:
            raise ValueError("latency must be >= 0")


@dataclass(frozen=True)
class RateCard:
    """Prices used for cost accounting; defaults follow the GPT-4-era card."""

    input_per_1k: float = 0.03
    output_per_1k: float = 0.06
    human_hourly: float = 10.0


def llm_cost(input_tokens: int, output_tokens: int, rates: RateCard) -> float:
    """Token-based API cost in currency units (full precision)."""
    if input_tokens < 0 or output_tokens < 0:
        raise ValueError("token counts must be >= 0")
    return input_tokens / 1000 * rates.input_per_1k + output_tokens / 1000 * rates.output_per_1k


def human_cost(wall_seconds: float, hourly_rate: float) -> float:
    """Wall-time cost of a human evaluator in currency units (full precision)."""
    if wall_seconds < 0 or hourly_rate < 0:
        raise ValueError("inputs must be >= 0")
    return wall_seconds / 3600 * hourly_rate


def round_cents(amount: float) -> float:
    """Display rounding: half-up to cents. The ledger keeps full precision."""
    return float(Decimal(repr(amount)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class LedgerEntry:
    request_id: str
    evaluator_kind: str  # "llm" | "human"
    input_tokens: int
    output_tokens: int
    wall_seconds: float
    cost: float
    tokens_estimated: bool = False
    task: str = ""  # e.g. "single_comment" | "comparison"


class CostLedger:
    """Append-only cost log; appends are serialized through one lock."""

    def __init__(self, rates: Optional[RateCard] = None):
        self.rates = rates or RateCard()
        self._entries: list[LedgerEntry] = []
        self._lock = threading.Lock()

    def record_llm(
        self,
        request_id: str,
        input_tokens: int,
        output_tokens: int,
        wall_seconds: float,
        tokens_estimated: bool = False,
        task: str = "",
    ) -> LedgerEntry:
        entry = LedgerEntry(
            request_id=request_id,
            evaluator_kind="llm",
            input_tokens=input_tokens,
            output_tokens=output_tokens,
            wall_seconds=wall_seconds,
            cost=llm_cost(input_tokens, output_tokens, self.rates),
            tokens_estimated=tokens_estimated,
            task=task,
        )
        with self._lock:
            self._entries.append(entry)
        return entry

    def record_human(
        self, request_id: str, wall_seconds: float, task: str = ""
    ) -> LedgerEntry:
        entry = LedgerEntry(
            request_id=request_id,
            evaluator_kind="human",
            input_tokens=0,
            output_tokens=0,
            wall_seconds=wall_seconds,
            cost=human_cost(wall_seconds, self.rates.human_hourly),
            task=task,
        )
        with self._lock:
            self._entries.append(entry)
        return entry

    @property
    def entries(self) -> list[LedgerEntry]:
        with self._lock:
            return list(self._entries)

    def total_cost(self) -> float:
        return sum(e.cost for e in self.entries)

    def recompute(self, entry: LedgerEntry) -> float:
        """Recompute an entry's cost from its raw quantities and the rate card."""
        if entry.evaluator_kind == "llm":
            return llm_cost(entry.input_tokens, entry.output_tokens, self.rates)
        return human_cost(entry.wall_seconds, self.rates.human_hourly)


def estimate_tokens(text: str) -> int:
    # Fallback when the provider reports no usage: ~4 characters per token.
    return max(1, len(text) // 4) if text else 0


@dataclass
class ProviderResponse:
    text: str
    input_tokens: Optional[int] = None
    output_tokens: Optional[int] = None
    truncated: bool = False


class Provider(Protocol):
    name: str

    def send(self, request: CompletionRequest) -> ProviderResponse: ...


class HttpChatProvider:
    """OpenAI-style chat-completions client over HTTPS.

    The blueprint's rendered text is wrapped into a single user message;
    no provider-specific prompt structuring happens upstream.
    """

    def __init__(self, base_url: str, name: str = "http", timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.name = name
        self.timeout = timeout

    def send(self, request: CompletionRequest) -> ProviderResponse:
        api_key = os.environ.get(API_KEY_ENV)
        if not api_key:
            raise AuthError(f"{API_KEY_ENV} is not set")
        payload = {
            "model": request.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        try:
            response = httpx.post(
                f"{self.base_url}/chat/completions",
                json=payload,
                headers={"Authorization": f"Bearer {api_key}"},
                timeout=self.timeout,
            )
        except httpx.HTTPError as exc:
            raise TransientProviderError(str(exc)) from exc
        if response.status_code in (401, 403):
            raise AuthError(f"provider rejected credential: {response.status_code}")
        if response.status_code == 429 or response.status_code >= 500:
            raise TransientProviderError(f"status {response.status_code}")
        if response.status_code != 200:
            raise GatewayError(f"unexpected status {response.status_code}: {response.text}")
        body = response.json()
        choice = body["choices"][0]
        usage = body.get("usage") or {}
        return ProviderResponse(
            text=choice["message"]["content"],
            input_tokens=usage.get("prompt_tokens"),
            output_tokens=usage.get("completion_tokens"),
            truncated=choice.get("finish_reason") == "length",
        )


def prompt_key(prompt: str) -> str:
    """Stable prompt hash used to key canned mock responses."""
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class MockProvider:
    """Deterministic offline provider.

    Responses are keyed by the sha256 of the prompt (order-independent
    golden tests) with an optional fallback factory. A failure script can
    force transient errors before a success to exercise retry paths.
    """

    name = "mock"

    def __init__(
        self,
        canned: Optional[dict[str, str]] = None,
        fallback: Optional[Callable[[str], str]] = None,
        failure_script: Optional[list[Exception]] = None,
    ):
        # Accept raw-prompt keys too; normalize everything to hashes.
        self._canned = {}
        for key, value in (canned or {}).items():
            self._canned[key if len(key) == 64 and key.isalnum() else prompt_key(key)] = value
        self._fallback = fallback
        self._failures = list(failure_script or [])
        self.attempts = 0

    def send(self, request: CompletionRequest) -> ProviderResponse:
        self.attempts += 1
        if self._failures:
            raise self._failures.pop(0)
        key = prompt_key(request.prompt)
        if key in self._canned:
            return ProviderResponse(text=self._canned[key])
        if self._fallback is not None:
            return ProviderResponse(text=self._fallback(request.prompt))
        raise GatewayError(f"mock has no response for prompt hash {key[:12]}")


class TokenBucketLimiter:
    """Blocking token bucket gating outbound requests per minute."""

    def __init__(
        self,
        requests_per_minute: float,
        clock: Callable[[], float] = time.monotonic,
        sleeper: Callable[[float], None] = time.sleep,
    ):
        if requests_per_minute <= 0:
            raise ValueError("requests_per_minute must be > 0")
        self.rate = requests_per_minute / 60.0
        self.capacity = max(1.0, requests_per_minute / 60.0)
        self._tokens = self.capacity
        self._clock = clock
        self._sleeper = sleeper
        self._last = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
                self._last = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            self._sleeper(wait)


class Gateway:
    """Completion front door: rate limit -> retry loop -> ledger entry."""

    def __init__(
        self,
        provider: Provider,
        ledger: Optional[CostLedger] = None,
        max_retries: int = 3,
        backoff_base: float = 0.5,
        rate_limiter: Optional[TokenBucketLimiter] = None,
        clock: Callable[[], float] = time.monotonic,
        sleeper: Callable[[float], None] = time.sleep,
    ):
        self.provider = provider
        self.ledger = ledger if ledger is not None else CostLedger()
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.rate_limiter = rate_limiter
        self._clock = clock
        self._sleeper = sleeper
        self.request_log: list[tuple[str, str]] = []  # (request_id, prompt) as sent

    def complete(self, request: CompletionRequest) -> CompletionResult:
        if self.rate_limiter is not None:
            self.rate_limiter.acquire()
        start = self._clock()
        attempt = 0
        while True:
            attempt += 1
            self.request_log.append((request.request_id, request.prompt))
            try:
                response = self.provider.send(request)
                break
            except TransientProviderError:
                if attempt > self.max_retries:
                    raise RetryBudgetExhausted(
                        f"gave up after {attempt} attempts for {request.request_id}"
                    )
                self._sleeper(self.backoff_base * 2 ** (attempt - 1))
        latency = max(0.0, self._clock() - start)
        estimated = response.input_tokens is None or response.output_tokens is None
        input_tokens = (
            response.input_tokens
            if response.input_tokens is not None
            else estimate_tokens(request.prompt)
        )
        output_tokens = (
            response.output_tokens
            if response.output_tokens is not None
            else estimate_tokens(response.text)
        )
        self.ledger.record_llm(
            request.request_id, input_tokens, output_tokens, latency, tokens_estimated=estimated
        )
        return CompletionResult(
            text=response.text,
            input_tokens=input_tokens,
            output_tokens=output_tokens,
            latency_seconds=latency,
            provider=self.provider.name,
            truncated=response.truncated,
            tokens_estimated=estimated,
        )
