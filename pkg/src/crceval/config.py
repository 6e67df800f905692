"""Harness configuration: provider settings and the cost rate card."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .gateway import (
    CostLedger,
    Gateway,
    HttpChatProvider,
    MockProvider,
    RateCard,
    TokenBucketLimiter,
)
from .mockjudge import synthetic_response


@dataclass
class ProviderConfig:
    base_url: str = ""
    model: str = "mock"
    temperature: float = 0.1
    max_tokens: int = 8192
    kind: str = "mock"  # "mock" | "http"
    requests_per_minute: Optional[float] = None


@dataclass
class HarnessConfig:
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    rates: RateCard = field(default_factory=RateCard)


def load_config(path: Optional[str | Path]) -> HarnessConfig:
    if path is None:
        return HarnessConfig()
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    provider_raw = raw.get("provider") or {}
    rates_raw = raw.get("rates") or {}
    provider = ProviderConfig(
        base_url=provider_raw.get("base_url", ""),
        model=provider_raw.get("model", "mock"),
        temperature=float(provider_raw.get("temperature", 0.1)),
        max_tokens=int(provider_raw.get("max_tokens", 8192)),
        kind=provider_raw.get("kind", "http" if provider_raw.get("base_url") else "mock"),
        requests_per_minute=provider_raw.get("requests_per_minute"),
    )
    rates = RateCard(
        input_per_1k=float(rates_raw.get("input_per_1k", 0.03)),
        output_per_1k=float(rates_raw.get("output_per_1k", 0.06)),
        human_hourly=float(rates_raw.get("human_hourly", 10.0)),
    )
    return HarnessConfig(provider=provider, rates=rates)


def build_gateway(config: HarnessConfig) -> Gateway:
    if config.provider.kind == "http":
        provider = HttpChatProvider(config.provider.base_url)
    else:
        # Offline default: deterministic synthetic judge/reviewer.
        provider = MockProvider(fallback=synthetic_response)
    limiter = (
        TokenBucketLimiter(config.provider.requests_per_minute)
        if config.provider.requests_per_minute
        else None
    )
    return Gateway(provider, ledger=CostLedger(config.rates), rate_limiter=limiter)
