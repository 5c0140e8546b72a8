"""Chat-completions transport (OpenAI-compatible wire format)."""

from __future__ import annotations

import logging
import os
import random
import threading
import time
from dataclasses import dataclass
from typing import Callable, Optional
from urllib.parse import urlparse

import httpx

log = logging.getLogger(__name__)

DEFAULT_KEY_ENV = "AKEYS_API_KEY"
RETRY_STATUSES = {429, 500, 502, 503, 504}


class LlmError(Exception):
    pass


class AuthError(LlmError):
    pass


class RetriesExhausted(LlmError):
    pass


class MalformedResponse(LlmError):
    pass


class RequestRejected(LlmError):
    """Non-retryable 4xx other than auth failures."""


@dataclass(frozen=True)
class LlmConfig:
    endpoint: str
    model: str
    api_key_env: str = DEFAULT_KEY_ENV
    timeout: float = 60.0
    max_retries: int = 3
    temperature: float = 0.0
    backoff_base: float = 1.0
    backoff_factor: float = 2.0
    max_in_flight: int = 4

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if not 0 <= self.max_retries <= 5:
            raise ValueError("max_retries must be in 0..5")
        parsed = urlparse(self.endpoint)
        if not (parsed.scheme in ("http", "https") and parsed.netloc):
            raise ValueError(f"endpoint must be an absolute http(s) URL: {self.endpoint!r}")

    @property
    def url(self) -> str:
        base = self.endpoint.rstrip("/")
        if base.endswith("/chat/completions"):
            return base
        return base + "/chat/completions"


@dataclass
class CallStats:
    calls: int = 0
    prompt_tokens: int = 0
    completion_tokens: int = 0
    retries: int = 0
    wall_time: float = 0.0


class LlmClient:
    """Blocking client shareable across threads.

    ``calls`` counts HTTP requests issued, retries included.
    """

    def __init__(self, config: LlmConfig, *, sleep: Callable[[float], None] = time.sleep,
                 rng: Optional[random.Random] = None, transport: Optional[httpx.BaseTransport] = None):
        self.config = config
        self.stats = CallStats()
        self._sleep = sleep
        self._rng = rng or random.Random()
        self._lock = threading.Lock()
        self._in_flight = threading.BoundedSemaphore(max(1, config.max_in_flight))
        self._http = httpx.Client(timeout=config.timeout, transport=transport)

    def close(self) -> None:
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.config.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def backoff(self, attempt: int) -> float:
        delay = self.config.backoff_base * self.config.backoff_factor ** attempt
        return delay * (0.5 + self._rng.random() / 2)

    def _count(self, **kw) -> None:
        with self._lock:
            for k, v in kw.items():
                setattr(self.stats, k, getattr(self.stats, k) + v)

    def complete(self, system: str, user: str) -> str:
        body = {
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
            "temperature": self.config.temperature,
        }
        last_error = "no attempt made"
        for attempt in range(self.config.max_retries + 1):
            if attempt:
                self._count(retries=1)
                self._sleep(self.backoff(attempt - 1))
            t0 = time.monotonic()
            try:
                with self._in_flight:
                    self._count(calls=1)
                    resp = self._http.post(self.config.url, json=body, headers=self._headers())
            except (httpx.TimeoutException, httpx.TransportError) as exc:
                last_error = f"{type(exc).__name__}: {exc}"
                log.warning("LLM transport error (attempt %d): %s", attempt + 1, last_error)
                continue
            finally:
                self._count(wall_time=time.monotonic() - t0)

            if resp.status_code in (401, 403):
                raise AuthError(f"HTTP {resp.status_code} from {self.config.url}")
            if resp.status_code in RETRY_STATUSES:
                last_error = f"HTTP {resp.status_code}"
                log.warning("LLM endpoint returned %d (attempt %d)", resp.status_code, attempt + 1)
                continue
            if resp.status_code >= 400:
                raise RequestRejected(f"HTTP {resp.status_code}: {resp.text[:200]}")
            return self._content(resp)
        raise RetriesExhausted(f"gave up after {self.config.max_retries + 1} attempts ({last_error})")

    def _content(self, resp: httpx.Response) -> str:
        try:
            payload = resp.json()
            content = payload["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise MalformedResponse(f"unexpected response body: {exc!r}") from None
        if not isinstance(content, str):
            raise MalformedResponse("message content is not a string")
        usage = payload.get("usage") or {}
        self._count(
            prompt_tokens=int(usage.get("prompt_tokens") or 0),
            completion_tokens=int(usage.get("completion_tokens") or 0),
        )
        return content
