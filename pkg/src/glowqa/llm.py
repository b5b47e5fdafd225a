"""Chat-completion gateway: HTTP client, deterministic mock, token accounting.

Every prompt in the engine flows through this module, so the mock gateway can
replay an entire pipeline offline from a transcript of match rules.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import httpx

from .errors import ProviderError, TransportError

DEFAULT_MAX_TOKENS = 512
DEFAULT_ATTEMPTS = 3
DEFAULT_CONCURRENCY = 4

ENDPOINT_ENV = "GLOW_LLM_ENDPOINT"
API_KEY_ENV = "GLOW_LLM_API_KEY"


def estimate_tokens(text: str) -> int:
    """ceil(len/4); used whenever the provider omits usage numbers."""
    return math.ceil(len(text) / 4)


@dataclass(frozen=True)
class ChatRequest:
    system_text: str
    user_text: str
    model_id: str = "default"
    temperature: float = 0.0
    max_tokens: int = DEFAULT_MAX_TOKENS
    seed: int | None = None

    def __post_init__(self):
        if not self.user_text:
            raise ValueError("user_text must be non-empty")


@dataclass(frozen=True)
class ChatResponse:
    text: str
    prompt_tokens: int
    completion_tokens: int
    latency: float
    retries: int = 0


class ChatGateway(Protocol):
    def complete(self, req: ChatRequest) -> ChatResponse: ...


def prompt_hash(system_text: str, user_text: str) -> str:
    return hashlib.sha256(f"{system_text}\x00{user_text}".encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class MockRule:
    """One transcript entry: how to match a request and what to answer.

    kind is "exact_hash" (sha256 of system+user), "substring" (in the user
    text), or "default" (matches anything).
    """

    kind: str
    value: str
    response: str

    def matches(self, req: ChatRequest) -> bool:
        if self.kind == "exact_hash":
            return prompt_hash(req.system_text, req.user_text) == self.value
        if self.kind == "substring":
            return self.value in req.user_text
        if self.kind == "default":
            return True
        raise ValueError(f"unknown mock rule kind: {self.kind}")


class MockChatGateway:
    """Deterministic scripted gateway for offline runs.

    Resolution order: exact-hash rules, then substring rules in transcript
    order, then the first default rule, then the literal string "UNKNOWN".
    """

    def __init__(self, rules: list[MockRule] | None = None):
        self.rules = list(rules or [])
        self.requests: list[ChatRequest] = []

    def add(self, kind: str, value: str, response: str) -> "MockChatGateway":
        self.rules.append(MockRule(kind, value, response))
        return self

    def complete(self, req: ChatRequest) -> ChatResponse:
        self.requests.append(req)
        text = None
        for kind in ("exact_hash", "substring", "default"):
            for rule in self.rules:
                if rule.kind == kind and rule.matches(req):
                    text = rule.response
                    break
            if text is not None:
                break
        if text is None:
            text = "UNKNOWN"
        return ChatResponse(
            text=text,
            prompt_tokens=estimate_tokens(req.system_text) + estimate_tokens(req.user_text),
            completion_tokens=estimate_tokens(text),
            latency=0.0,
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "MockChatGateway":
        records = json.loads(Path(path).read_text(encoding="utf-8"))
        rules = [MockRule(r["kind"], r.get("value", ""), r["response"]) for r in records]
        return cls(rules)

    def to_file(self, path: str | Path) -> None:
        records = [
            {"kind": r.kind, "value": r.value, "response": r.response} for r in self.rules
        ]
        Path(path).write_text(json.dumps(records, indent=2), encoding="utf-8")


_RETRYABLE_STATUS = {408, 429, 500, 502, 503, 504}


class HttpChatGateway:
    """OpenAI-style chat-completions client with bounded retries.

    Transient failures (connect errors, 429, 5xx) are retried with
    exponential backoff up to `attempts` total tries.
    """

    def __init__(
        self,
        endpoint: str | None = None,
        api_key: str | None = None,
        attempts: int = DEFAULT_ATTEMPTS,
        backoff_base: float = 0.25,
        timeout: float = 120.0,
        concurrency: int = DEFAULT_CONCURRENCY,
        client: httpx.Client | None = None,
    ):
        self.endpoint = endpoint or os.environ.get(ENDPOINT_ENV, "")
        if not self.endpoint:
            raise ValueError(f"no LLM endpoint configured (set {ENDPOINT_ENV})")
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.attempts = attempts
        self.backoff_base = backoff_base
        self._client = client or httpx.Client(timeout=timeout)
        self._slots = threading.Semaphore(concurrency)

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    def complete(self, req: ChatRequest) -> ChatResponse:
        body: dict = {
            "model": req.model_id,
            "messages": [
                {"role": "system", "content": req.system_text},
                {"role": "user", "content": req.user_text},
            ],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        }
        if req.seed is not None:
            body["seed"] = req.seed

        start = time.monotonic()
        last_error: Exception | None = None
        with self._slots:
            for attempt in range(self.attempts):
                if attempt:
                    time.sleep(self.backoff_base * (2 ** (attempt - 1)))
                try:
                    resp = self._client.post(self.endpoint, json=body, headers=self._headers())
                except httpx.HTTPError as exc:
                    last_error = exc
                    continue
                if resp.status_code in _RETRYABLE_STATUS:
                    last_error = ProviderError(f"status {resp.status_code}: {resp.text[:200]}")
                    continue
                if resp.status_code != 200:
                    raise ProviderError(f"status {resp.status_code}: {resp.text[:500]}")
                return self._parse(resp, req, retries=attempt, start=start)
        raise TransportError(
            f"chat completion failed after {self.attempts} attempts: {last_error}"
        )

    def _parse(self, resp: httpx.Response, req: ChatRequest, retries: int, start: float) -> ChatResponse:
        latency = time.monotonic() - start
        try:
            payload = resp.json()
        except json.JSONDecodeError as exc:
            raise ProviderError(f"malformed completion payload: {exc}") from exc
        if "error" in payload:
            raise ProviderError(str(payload["error"]))
        try:
            text = payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"unexpected completion shape: {exc}") from exc
        usage = payload.get("usage") or {}
        prompt_tokens = usage.get(
            "prompt_tokens", estimate_tokens(req.system_text) + estimate_tokens(req.user_text)
        )
        completion_tokens = usage.get("completion_tokens", estimate_tokens(text))
        return ChatResponse(
            text=text,
            prompt_tokens=int(prompt_tokens),
            completion_tokens=int(completion_tokens),
            latency=latency,
            retries=retries,
        )


@dataclass
class LlmSession:
    """A gateway bound to a model and decoding settings."""

    gateway: ChatGateway
    model_id: str = "default"
    temperature: float = 0.0
    max_tokens: int = DEFAULT_MAX_TOKENS
    seed: int | None = None
    calls: list[ChatResponse] = field(default_factory=list)

    def ask(self, system_text: str, user_text: str) -> ChatResponse:
        resp = self.gateway.complete(
            ChatRequest(
                system_text=system_text,
                user_text=user_text,
                model_id=self.model_id,
                temperature=self.temperature,
                max_tokens=self.max_tokens,
                seed=self.seed,
            )
        )
        self.calls.append(resp)
        return resp
