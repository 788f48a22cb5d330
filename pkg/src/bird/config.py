"""Application configuration for the CLI and the HTTP service.

A JSON key-value file selects the provider backend, where bundles and
fixtures live, and the runtime defaults; environment variables supply the
live-provider credentials (see the llm module). Everything has a working
default so small commands run with no config at all.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ProviderError, ValidationError
from .llm import CachingProvider, FixtureProvider, FixtureStore, HttpProvider, Provider
from .pipeline import EntailmentConfig

PROVIDER_KINDS = ("none", "fixture", "http")


@dataclass(frozen=True)
class AppConfig:
    provider: str = "none"
    fixture_paths: tuple[str, ...] = ()
    cache_path: str | None = None
    bundle_paths: tuple[str, ...] = ()
    session_log: str | None = None
    entail_total_samples: int = 3
    entail_hierarchy_count: int = 2
    question_seed: int = 0

    def __post_init__(self):
        if self.provider not in PROVIDER_KINDS:
            raise ValidationError(
                f"provider must be one of {PROVIDER_KINDS}, got {self.provider!r}"
            )
        if self.provider == "fixture" and not self.fixture_paths:
            raise ValidationError("fixture provider needs at least one fixture path")

    @property
    def entailment(self) -> EntailmentConfig:
        return EntailmentConfig(
            total_samples=self.entail_total_samples,
            hierarchy_count=self.entail_hierarchy_count,
        )

    @classmethod
    def from_file(cls, path: Path | str) -> "AppConfig":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ValidationError(f"{path}: config must be a JSON object")
        known = {
            "provider": str,
            "fixture_paths": list,
            "cache_path": str,
            "bundle_paths": list,
            "session_log": str,
            "entail_total_samples": int,
            "entail_hierarchy_count": int,
            "question_seed": int,
        }
        kwargs = {}
        for key, value in doc.items():
            if key not in known:
                raise ValidationError(f"{path}: unknown config key {key!r}")
            if not isinstance(value, known[key]):
                raise ValidationError(
                    f"{path}: {key} must be {known[key].__name__}"
                )
            kwargs[key] = tuple(value) if known[key] is list else value
        return cls(**kwargs)

    def build_provider(self) -> Provider | None:
        """The configured completion backend, or None when LLM-free."""
        if self.provider == "none":
            return None
        if self.provider == "fixture":
            provider: Provider = FixtureProvider(
                FixtureStore.from_files(self.fixture_paths)
            )
        else:
            provider = HttpProvider.from_env()
        if self.cache_path:
            provider = CachingProvider(provider, self.cache_path)
        return provider

    def require_provider(self) -> Provider:
        provider = self.build_provider()
        if provider is None:
            raise ProviderError(
                "this operation needs an LLM provider; configure provider="
                "\"fixture\" with fixture_paths or provider=\"http\" with the "
                "BIRD_LLM_* environment variables"
            )
        return provider
