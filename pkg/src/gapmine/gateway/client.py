"""Provider-agnostic completion client.

A backend is anything with ``send(request) -> (text, usage)``. The HTTP
backend speaks the OpenAI-compatible chat-completions protocol; the
mock backend (see :mod:`gapmine.gateway.mock`) is canned and offline.
``complete`` layers caching, retry with exponential backoff, and
manifest logging on top of either.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass, field
from typing import Protocol

import requests

from ..errors import (
    ContextLengthError,
    ProviderError,
    RetryableServiceError,
    TransportError,
)
from .cache import FileCache, digest_key
from .manifest import ManifestWriter


@dataclass(frozen=True)
class CompletionRequest:
    model_id: str
    prompt: str
    temperature: float = 0.0
    max_output_tokens: int = 1024
    request_tag: str = ""

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be non-empty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be >= 1")


@dataclass(frozen=True)
class CompletionResult:
    text: str
    model_id: str
    cache_key: str
    cached: bool
    attempts: int
    usage: dict = field(default_factory=dict)


class Backend(Protocol):
    def send(self, request: CompletionRequest) -> tuple[str, dict]:
        """Return (completion text, usage metadata). May raise ServiceError."""
        ...  # pragma: no cover


@dataclass
class ServiceEndpoint:
    """An OpenAI-compatible chat-completions endpoint."""

    base_url: str
    path: str = "/v1/chat/completions"
    api_key_env: str | None = None
    timeout: float = 120.0

    def auth_headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_key_env:
            token = os.environ.get(self.api_key_env, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers


_CONTEXT_MARKERS = ("context_length_exceeded", "maximum context length")


class HttpBackend:
    def __init__(self, endpoint: ServiceEndpoint):
        self.endpoint = endpoint

    def send(self, request: CompletionRequest) -> tuple[str, dict]:
        url = self.endpoint.base_url.rstrip("/") + self.endpoint.path
        payload = {
            "model": request.model_id,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        try:
            resp = requests.post(url, json=payload,
                                 headers=self.endpoint.auth_headers(),
                                 timeout=self.endpoint.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"{url}: {exc}") from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            raise RetryableServiceError(f"{url}: HTTP {resp.status_code}")
        if resp.status_code != 200:
            body = resp.text[:2000]
            if any(marker in body for marker in _CONTEXT_MARKERS):
                raise ContextLengthError(body)
            raise ProviderError(f"HTTP {resp.status_code}: {body}")
        try:
            data = resp.json()
            text = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed completion payload: {exc}") from exc
        return text, data.get("usage", {}) or {}


@dataclass
class RetryPolicy:
    max_attempts: int = 3
    backoff_base: float = 0.5


def cache_key_for(request: CompletionRequest) -> str:
    """Digest of exactly (model_id, prompt, temperature, max_output_tokens)."""
    return digest_key(request.model_id, request.prompt,
                      request.temperature, request.max_output_tokens)


class _KeyLocks:
    """Per-key locks so duplicate concurrent misses collapse to one call."""

    def __init__(self):
        self._guard = threading.Lock()
        self._locks: dict[str, threading.Lock] = {}

    def acquire(self, key: str) -> threading.Lock:
        with self._guard:
            lock = self._locks.setdefault(key, threading.Lock())
        return lock


_key_locks = _KeyLocks()


def complete(
    request: CompletionRequest,
    backend: Backend,
    cache: FileCache | None = None,
    manifest: ManifestWriter | None = None,
    retry: RetryPolicy | None = None,
) -> CompletionResult:
    """Run one completion with caching, retries, and manifest logging.

    Cache hits return without touching the backend. Transport and
    transient provider failures retry with exponential backoff up to the
    attempt cap; context-length rejections and hard provider errors
    surface immediately and leave no cache entry.
    """
    retry = retry or RetryPolicy()
    key = cache_key_for(request)

    def finish(result: CompletionResult) -> CompletionResult:
        if manifest is not None:
            manifest.append({
                "cache_key": result.cache_key,
                "model_id": result.model_id,
                "unit_id": request.request_tag,
                "cached": result.cached,
                "attempts": result.attempts,
                "usage": result.usage,
            })
        return result

    def cached_result() -> CompletionResult | None:
        if cache is None:
            return None
        entry = cache.get(key)
        if entry is None:
            return None
        return CompletionResult(
            text=entry["text"], model_id=request.model_id, cache_key=key,
            cached=True, attempts=0, usage=entry.get("usage", {}),
        )

    hit = cached_result()
    if hit is not None:
        return finish(hit)

    lock = _key_locks.acquire(key)
    with lock:
        hit = cached_result()  # a concurrent miss may have filled it
        if hit is not None:
            return finish(hit)
        attempts = 0
        while True:
            attempts += 1
            try:
                text, usage = backend.send(request)
                break
            except (TransportError, RetryableServiceError):
                if attempts >= retry.max_attempts:
                    raise
                time.sleep(retry.backoff_base * 2 ** (attempts - 1))
        if cache is not None:
            cache.put(key, {"text": text, "usage": usage,
                            "model_id": request.model_id})
        return finish(CompletionResult(
            text=text, model_id=request.model_id, cache_key=key,
            cached=False, attempts=attempts, usage=usage,
        ))
