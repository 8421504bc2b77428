"""Chat-completion clients: an HTTP client for OpenAI-compatible endpoints and
an offline replay client fed from recorded fixtures."""

from __future__ import annotations

import json
import logging
import os
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Protocol, Sequence

import httpx

logger = logging.getLogger(__name__)

FIXTURE_SCHEMA_VERSION = 1
RETRYABLE_STATUS = {429, 500, 502, 503, 504}


class LlmError(RuntimeError):
    """A call failed; the generator falls back to uniform sampling."""


class LlmAuthError(LlmError):
    pass


class LlmConfigError(LlmError):
    pass


class FixtureError(LlmError):
    pass


@dataclass(frozen=True)
class LlmRequest:
    model: str
    messages: tuple[tuple[str, str], ...]
    temperature: float = 0.7
    max_tokens: int = 2048

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if sum(1 for role, _ in self.messages if role == "user") != 1:
            raise ValueError("exactly one user message per request")

    @classmethod
    def from_prompt(cls, prompt: str, model: str, temperature: float = 0.7, max_tokens: int = 2048) -> "LlmRequest":
        return cls(model=model, messages=(("user", prompt),), temperature=temperature, max_tokens=max_tokens)

    @property
    def prompt(self) -> str:
        return next(text for role, text in self.messages if role == "user")

    def to_body(self) -> dict:
        return {
            "model": self.model,
            "messages": [{"role": role, "content": text} for role, text in self.messages],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }


@dataclass(frozen=True)
class LlmResponse:
    text: str
    prompt_tokens: int = 0
    completion_tokens: int = 0
    latency_ms: float = 0.0


@dataclass
class UsageMeter:
    calls: int = 0
    prompt_tokens: int = 0
    completion_tokens: int = 0
    latency_ms: float = 0.0
    failures: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def record(self, response: LlmResponse) -> None:
        with self._lock:
            self.calls += 1
            self.prompt_tokens += response.prompt_tokens
            self.completion_tokens += response.completion_tokens
            self.latency_ms += response.latency_ms

    def record_failure(self) -> None:
        with self._lock:
            self.failures += 1

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "calls": self.calls,
                "prompt_tokens": self.prompt_tokens,
                "completion_tokens": self.completion_tokens,
                "latency_ms": round(self.latency_ms, 3),
                "failures": self.failures,
            }


class ChatClient(Protocol):
    usage: UsageMeter

    def chat_complete(self, request: LlmRequest) -> LlmResponse: ...


@dataclass
class EndpointConfig:
    url: str = "https://api.openai.com/v1/chat/completions"
    api_key_env: str = "LLM_API_KEY"
    timeout_s: float = 60.0
    max_retries: int = 3
    backoff_base_s: float = 1.0
    backoff_cap_s: float = 30.0
    max_in_flight: int = 5


class HttpChatClient:
    """Blocking client for ``POST {url}`` with the chat-completions JSON body."""

    def __init__(
        self,
        endpoint: EndpointConfig | None = None,
        *,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
        jitter: Callable[[], float] = random.random,
    ) -> None:
        self.endpoint = endpoint or EndpointConfig()
        api_key = os.environ.get(self.endpoint.api_key_env)
        if not api_key:
            raise LlmConfigError(f"environment variable {self.endpoint.api_key_env} is not set")
        self._headers = {"Authorization": f"Bearer {api_key}", "Content-Type": "application/json"}
        self._http = httpx.Client(timeout=self.endpoint.timeout_s, transport=transport)
        self._sleep = sleep
        self._jitter = jitter
        self._gate = threading.BoundedSemaphore(max(1, self.endpoint.max_in_flight))
        self.usage = UsageMeter()

    def close(self) -> None:
        self._http.close()

    def _backoff(self, attempt: int) -> float:
        delay = min(self.endpoint.backoff_cap_s, self.endpoint.backoff_base_s * 2**attempt)
        return delay * (0.5 + 0.5 * self._jitter())

    def chat_complete(self, request: LlmRequest) -> LlmResponse:
        with self._gate:
            try:
                return self._post(request)
            except LlmError:
                self.usage.record_failure()
                raise

    def _post(self, request: LlmRequest) -> LlmResponse:
        body = request.to_body()
        last_error = "no attempt made"
        for attempt in range(self.endpoint.max_retries + 1):
            started = time.perf_counter()
            try:
                resp = self._http.post(self.endpoint.url, headers=self._headers, json=body)
            except httpx.TransportError as exc:  # timeouts, connection resets
                last_error = f"transport error: {exc}"
            else:
                if resp.status_code in (401, 403):
                    raise LlmAuthError(f"authentication failed ({resp.status_code})")
                if resp.status_code in RETRYABLE_STATUS:
                    last_error = f"HTTP {resp.status_code}"
                elif resp.status_code >= 400:
                    raise LlmError(f"HTTP {resp.status_code}: {resp.text[:200]}")
                else:
                    latency = (time.perf_counter() - started) * 1000.0
                    response = _parse_completion(resp, latency)
                    self.usage.record(response)
                    return response
            if attempt < self.endpoint.max_retries:
                delay = self._backoff(attempt)
                logger.warning("LLM call failed (%s); retrying in %.2fs", last_error, delay)
                self._sleep(delay)
        raise LlmError(f"retry budget exhausted: {last_error}")


def _parse_completion(resp: httpx.Response, latency_ms: float) -> LlmResponse:
    try:
        payload = resp.json()
    except ValueError as exc:
        raise LlmError("endpoint returned a non-JSON body") from exc
    try:
        text = payload["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise LlmError("response has no choices[0].message.content") from exc
    if text is None:
        raise LlmError("empty assistant content")
    usage = payload.get("usage") or {}
    return LlmResponse(
        text=str(text),
        prompt_tokens=int(usage.get("prompt_tokens", 0) or 0),
        completion_tokens=int(usage.get("completion_tokens", 0) or 0),
        latency_ms=latency_ms,
    )


# -- fixtures -----------------------------------------------------------------


def record_fixture(request: LlmRequest, response: LlmResponse, path: str | Path) -> Path:
    path = Path(path)
    doc = {
        "schema_version": FIXTURE_SCHEMA_VERSION,
        "request": request.to_body(),
        "response_text": response.text,
        "usage": {"prompt_tokens": response.prompt_tokens, "completion_tokens": response.completion_tokens},
    }
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    except OSError as exc:
        raise FixtureError(f"cannot write fixture {path}: {exc}") from exc
    return path


def load_fixture(path: str | Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise FixtureError(f"cannot read fixture {path}: {exc}") from exc
    if doc.get("schema_version") != FIXTURE_SCHEMA_VERSION:
        raise FixtureError(f"fixture {path} has schema_version {doc.get('schema_version')!r}, expected {FIXTURE_SCHEMA_VERSION}")
    if not isinstance(doc.get("response_text"), str):
        raise FixtureError(f"fixture {path} has no response_text")
    return doc


class ReplayClient:
    """Serves recorded responses in order; never touches the network.

    With ``cycle=True`` the sequence restarts when exhausted, otherwise an
    exhausted replay raises :class:`LlmError` (which generators treat like any
    failed call).
    """

    def __init__(self, fixtures: Iterable[str | Path | dict], *, cycle: bool = False) -> None:
        self._docs = [f if isinstance(f, dict) else load_fixture(f) for f in fixtures]
        self._pos = 0
        self._cycle = cycle
        self._lock = threading.Lock()
        self.usage = UsageMeter()
        self.requests: list[LlmRequest] = []

    @classmethod
    def from_dir(cls, directory: str | Path, *, cycle: bool = False) -> "ReplayClient":
        files = sorted(Path(directory).glob("*.json"))
        if not files:
            raise FixtureError(f"no fixtures in {directory}")
        return cls(files, cycle=cycle)

    @classmethod
    def from_texts(cls, texts: Sequence[str], *, cycle: bool = False) -> "ReplayClient":
        docs = [{"schema_version": FIXTURE_SCHEMA_VERSION, "request": {}, "response_text": t} for t in texts]
        return cls(docs, cycle=cycle)

    def chat_complete(self, request: LlmRequest) -> LlmResponse:
        with self._lock:
            self.requests.append(request)
            if self._pos >= len(self._docs):
                if not self._cycle or not self._docs:
                    self.usage.record_failure()
                    raise LlmError("replay fixtures exhausted")
                self._pos = 0
            doc = self._docs[self._pos]
            self._pos += 1
        usage = doc.get("usage") or {}
        response = LlmResponse(
            text=doc["response_text"],
            prompt_tokens=int(usage.get("prompt_tokens", 0)),
            completion_tokens=int(usage.get("completion_tokens", 0)),
        )
        self.usage.record(response)
        return response
