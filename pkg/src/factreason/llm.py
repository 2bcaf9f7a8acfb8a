"""Chat-completion client speaking the OpenAI-compatible JSON wire protocol."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from typing import Any

from .errors import TransportError
from .transport import DiskCache, HttpTransport, RequestBudget, Transport, cached

LLM_KEY_ENV = "FACTREASON_LLM_KEY"


@dataclass(frozen=True)
class LLMConfig:
    endpoint: str = "http://localhost:8000/v1"
    model_name: str = "llama-3.3-70b-instruct"
    temperature: float = 0.0
    max_retries: int = 3
    logprobs: bool = False
    top_logprobs: int = 5
    max_tokens: int | None = None

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")

    @property
    def url(self) -> str:
        return self.endpoint.rstrip("/") + "/chat/completions"


@dataclass(frozen=True)
class TokenLogprob:
    token: str
    logprob: float
    top: tuple[tuple[str, float], ...] = ()


@dataclass(frozen=True)
class ChatReply:
    text: str
    tokens: tuple[TokenLogprob, ...] | None = None


def build_request(config: LLMConfig, prompt: str) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "model": config.model_name,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": config.temperature,
    }
    if config.logprobs:
        payload["logprobs"] = True
        payload["top_logprobs"] = config.top_logprobs
    if config.max_tokens is not None:
        payload["max_tokens"] = config.max_tokens
    return payload


def parse_response(data: Any) -> ChatReply:
    try:
        choice = data["choices"][0]
        text = choice["message"]["content"] or ""
    except (KeyError, IndexError, TypeError) as exc:
        raise TransportError(f"malformed chat-completion response: {exc!r}") from None
    block = (choice.get("logprobs") or {}).get("content")
    if not block:
        return ChatReply(text, None)
    tokens = []
    for entry in block:
        top = tuple((alt["token"], float(alt["logprob"])) for alt in entry.get("top_logprobs") or ())
        tokens.append(TokenLogprob(entry["token"], float(entry["logprob"]), top))
    return ChatReply(text, tuple(tokens))


@dataclass
class ChatClient:
    config: LLMConfig = field(default_factory=LLMConfig)
    transport: Transport | None = None
    cache: DiskCache | None = None
    budget: RequestBudget | None = None
    api_key: str | None = None

    def __post_init__(self):
        if self.transport is None:
            self.transport = HttpTransport(max_retries=self.config.max_retries)
        if self.api_key is None:
            self.api_key = os.environ.get(LLM_KEY_ENV)

    def _post(self, payload: dict[str, Any]) -> Any:
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        if self.budget is None:
            return self.transport.post_json(self.config.url, payload, headers)
        with self.budget:
            return self.transport.post_json(self.config.url, payload, headers)

    def complete(self, prompt: str) -> ChatReply:
        payload = build_request(self.config, prompt)
        data = cached(self.cache, "chat", payload, lambda: self._post(payload))
        return parse_response(data)

    def with_config(self, **changes) -> "ChatClient":
        return ChatClient(replace(self.config, **changes), self.transport, self.cache, self.budget, self.api_key)
