"""Text-completion providers: live HTTP, recorded fixtures, and a cache.

Every prompt is addressed by a canonical digest (whitespace-normalized
text plus temperature), which keys both the persistent cache and the
fixture store. Fixture lookups are exact; a miss raises, so tests can
never silently fall through to a network call.

File format "llm_cache.v1": JSON lines, each
{"schema": "llm_cache.v1", "digest": ..., "prompt": ..., "temperature": ...,
 "texts": [...]}. Records for the same digest accumulate in file order.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol

import requests

from .errors import FixtureMissError, ProviderError, ValidationError

LLM_CACHE_SCHEMA = "llm_cache.v1"
DEFAULT_TEMPERATURE = 0.7
MAX_ATTEMPTS = 5
DEFAULT_MAX_IN_FLIGHT = 4

ENV_BASE_URL = "BIRD_LLM_BASE_URL"
ENV_MODEL = "BIRD_LLM_MODEL"
ENV_API_KEY = "BIRD_LLM_API_KEY"

_WHITESPACE = re.compile(r"\s+")


def canonical_digest(prompt: str, temperature: float = DEFAULT_TEMPERATURE) -> str:
    """Stable address of a prompt: sha256 over the schema tag, the
    temperature to six decimals, and the whitespace-collapsed prompt."""
    normalized = _WHITESPACE.sub(" ", prompt).strip()
    payload = f"{LLM_CACHE_SCHEMA}\n{float(temperature):.6f}\n{normalized}"
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    temperature: float = DEFAULT_TEMPERATURE
    n: int = 1
    max_tokens: int | None = None
    stop: tuple[str, ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"n must be at least 1, got {self.n}")
        if self.temperature < 0:
            raise ValidationError(f"temperature must be nonnegative, got {self.temperature}")

    @property
    def digest(self) -> str:
        return canonical_digest(self.prompt, self.temperature)


@dataclass(frozen=True)
class CompletionResponse:
    texts: tuple[str, ...]
    provider_id: str
    cached: bool = False

    def __post_init__(self):
        object.__setattr__(self, "texts", tuple(self.texts))

    @property
    def text(self) -> str:
        return self.texts[0]


class Provider(Protocol):
    provider_id: str

    def complete(self, request: CompletionRequest) -> CompletionResponse: ...


def _parse_record(line: str, lineno: int, source: str) -> dict:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{source}:{lineno}: not valid JSON: {exc}") from exc
    if record.get("schema") != LLM_CACHE_SCHEMA:
        raise ValidationError(
            f"{source}:{lineno}: expected schema {LLM_CACHE_SCHEMA!r}, "
            f"got {record.get('schema')!r}"
        )
    if "digest" not in record or not isinstance(record.get("texts"), list):
        raise ValidationError(f"{source}:{lineno}: record needs digest and texts")
    return record


def load_records(path: Path | str) -> dict[str, list[str]]:
    """Read a cache/fixture file into digest -> accumulated texts."""
    store: dict[str, list[str]] = {}
    path = Path(path)
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            record = _parse_record(line, lineno, str(path))
            store.setdefault(record["digest"], []).extend(
                str(t) for t in record["texts"]
            )
    return store


def append_record(
    path: Path | str,
    digest: str,
    texts: Iterable[str],
    prompt: str | None = None,
    temperature: float | None = None,
) -> None:
    record = {"schema": LLM_CACHE_SCHEMA, "digest": digest, "texts": list(texts)}
    if prompt is not None:
        record["prompt"] = prompt
    if temperature is not None:
        record["temperature"] = temperature
    with Path(path).open("a", encoding="utf-8") as handle:
        handle.write(json.dumps(record, ensure_ascii=False) + "\n")


class FixtureStore:
    """Recorded completions by digest, replayed round-robin.

    Successive requests walk the recorded list and wrap around, so a loop
    sampling one completion at a time sees each recording in order.
    """

    def __init__(self, records: dict[str, list[str]] | None = None):
        self._records = {k: list(v) for k, v in (records or {}).items()}
        self._cursors: dict[str, int] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: Path | str) -> "FixtureStore":
        return cls(load_records(path))

    @classmethod
    def from_files(cls, paths: Iterable[Path | str]) -> "FixtureStore":
        merged: dict[str, list[str]] = {}
        for path in paths:
            for digest, texts in load_records(path).items():
                merged.setdefault(digest, []).extend(texts)
        return cls(merged)

    def record(self, digest: str, texts: Iterable[str]) -> None:
        with self._lock:
            self._records.setdefault(digest, []).extend(texts)

    def known(self, digest: str) -> bool:
        return digest in self._records

    def take(self, digest: str, n: int) -> list[str]:
        with self._lock:
            texts = self._records.get(digest)
            if not texts:
                raise FixtureMissError(digest)
            cursor = self._cursors.get(digest, 0)
            out = [texts[(cursor + i) % len(texts)] for i in range(n)]
            self._cursors[digest] = (cursor + n) % len(texts)
            return out


class FixtureProvider:
    """Deterministic provider that replays a FixtureStore."""

    provider_id = "fixture"

    def __init__(self, store: FixtureStore):
        self.store = store

    @classmethod
    def from_file(cls, path: Path | str) -> "FixtureProvider":
        return cls(FixtureStore.from_file(path))

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        texts = self.store.take(request.digest, request.n)
        return CompletionResponse(
            texts=tuple(texts), provider_id=self.provider_id, cached=True
        )


class HttpProvider:
    """Chat-completions HTTP backend with bounded retries and concurrency.

    Issues POST {base_url}/chat/completions with the prompt as a single
    user message. Transient failures back off exponentially for up to
    MAX_ATTEMPTS tries before surfacing a ProviderError.
    """

    provider_id = "http"

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        *,
        max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
        timeout: float = 60.0,
        session: requests.Session | None = None,
        sleep=time.sleep,
    ):
        if not base_url:
            raise ValidationError("base_url must be non-empty")
        if not model:
            raise ValidationError("model must be non-empty")
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.timeout = timeout
        self._session = session or requests.Session()
        self._sleep = sleep
        self._semaphore = threading.Semaphore(max_in_flight)

    @classmethod
    def from_env(cls, environ: dict[str, str] | None = None, **kwargs) -> "HttpProvider":
        env = os.environ if environ is None else environ
        base_url = env.get(ENV_BASE_URL, "")
        if not base_url:
            raise ProviderError(f"{ENV_BASE_URL} is not set; no live provider available")
        model = env.get(ENV_MODEL, "")
        if not model:
            raise ProviderError(f"{ENV_MODEL} is not set; no live provider available")
        return cls(base_url, model, env.get(ENV_API_KEY) or None, **kwargs)

    def _payload(self, request: CompletionRequest) -> dict:
        payload: dict = {
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "n": request.n,
        }
        if request.max_tokens is not None:
            payload["max_tokens"] = request.max_tokens
        if request.stop:
            payload["stop"] = list(request.stop)
        return payload

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        url = f"{self.base_url}/chat/completions"
        last_error: Exception | None = None
        with self._semaphore:
            for attempt in range(MAX_ATTEMPTS):
                if attempt:
                    self._sleep(0.5 * 2 ** (attempt - 1))
                try:
                    response = self._session.post(
                        url,
                        json=self._payload(request),
                        headers=headers,
                        timeout=self.timeout,
                    )
                except requests.RequestException as exc:
                    last_error = exc
                    continue
                if response.status_code >= 500 or response.status_code == 429:
                    last_error = ProviderError(
                        f"provider returned HTTP {response.status_code}"
                    )
                    continue
                if response.status_code != 200:
                    raise ProviderError(
                        f"provider returned HTTP {response.status_code}: "
                        f"{response.text[:200]}"
                    )
                return self._extract(response, request)
        raise ProviderError(
            f"provider unreachable after {MAX_ATTEMPTS} attempts: {last_error}"
        )

    def _extract(self, response, request: CompletionRequest) -> CompletionResponse:
        try:
            body = response.json()
            choices = body["choices"]
            texts = tuple(choice["message"]["content"] for choice in choices)
        except (ValueError, KeyError, TypeError) as exc:
            raise ProviderError(f"malformed provider payload: {exc}") from exc
        if len(texts) != request.n:
            raise ProviderError(
                f"asked for {request.n} completions, provider sent {len(texts)}"
            )
        return CompletionResponse(texts=texts, provider_id=self.provider_id)


class CachingProvider:
    """Wraps a provider with a persistent, append-only completion cache.

    A request is served from the cache when at least n completions are
    already recorded for its digest; otherwise the inner provider is
    called and the fresh completions are appended to the cache file.
    """

    def __init__(self, inner: Provider, path: Path | str):
        self.inner = inner
        self.path = Path(path)
        self.provider_id = f"cached({inner.provider_id})"
        self._lock = threading.Lock()
        self._store: dict[str, list[str]] = (
            load_records(self.path) if self.path.exists() else {}
        )

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        digest = request.digest
        with self._lock:
            held = self._store.get(digest, [])
            if len(held) >= request.n:
                return CompletionResponse(
                    texts=tuple(held[: request.n]),
                    provider_id=self.provider_id,
                    cached=True,
                )
        response = self.inner.complete(request)
        with self._lock:
            self._store.setdefault(digest, []).extend(response.texts)
            self.path.parent.mkdir(parents=True, exist_ok=True)
            append_record(
                self.path,
                digest,
                response.texts,
                prompt=request.prompt,
                temperature=request.temperature,
            )
        return CompletionResponse(
            texts=response.texts, provider_id=self.provider_id, cached=False
        )
