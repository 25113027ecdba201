"""Model backend implementations.

Chat backends take a list of messages and return a :class:`ModelResponse`;
embedding backends map texts to dense vectors. The scripted backend is a
deterministic stand-in for a live model: it answers from an ordered rule
script, can simulate transient failures, and records every request it
receives so tests can inspect prompts, attempts, and call counts.
"""

from __future__ import annotations

import hashlib
import math
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Sequence

from ..errors import AccessibilityError, TransientError, ValidationError
from ..msg import Msg
from .config import ModelConfig, ScriptedRule


@dataclass
class ModelResponse:
    """What a chat backend returns from one successful invocation.

    ``text`` is exactly what response parsers consume. ``parsed`` stays
    None until a parsing layer succeeds and stores its result here.
    """

    text: str
    token_usage: dict[str, int] = field(default_factory=lambda: {"prompt": 0, "completion": 0})
    raw: Any = None
    parsed: Any = None


def whitespace_tokens(text: str) -> int:
    """Deterministic token count used by offline backends: split on whitespace."""
    return len(text.split())


def render_request(messages: Sequence[Msg]) -> str:
    """Flatten a prompt into the text scripted rules match against."""
    return "\n".join(f"{m.name}: {m.content}" for m in messages)


class ChatBackend:
    """Base class for chat-completion backends."""

    def __init__(self, config: ModelConfig):
        self.config = config

    @property
    def config_name(self) -> str:
        return self.config.config_name

    def invoke_once(self, messages: Sequence[Msg], **params: Any) -> ModelResponse:
        """One attempt against the backend. Raises :class:`TransientError`
        on retryable failures; the retry layer lives in :mod:`.invoke`."""
        raise NotImplementedError


@dataclass
class ScriptedCall:
    index: int
    request_text: str
    response_text: str


class _RuleState:
    __slots__ = ("rule", "fails_left", "used")

    def __init__(self, rule: ScriptedRule):
        self.rule = rule
        self.fails_left = rule.fail_times
        self.used = False


class ScriptedChatModel(ChatBackend):
    """Deterministic rule-driven chat backend.

    On each attempt the request text is matched against the script top to
    bottom; the first live rule wins. A rule with failures remaining
    raises a transient error and burns one failure; otherwise it answers
    and (unless it repeats) is consumed. Identical runs over identical
    scripts yield identical responses.
    """

    def __init__(self, config: ModelConfig):
        super().__init__(config)
        self._lock = threading.Lock()
        self._rules = [_RuleState(r) for r in config.script]
        self.attempts = 0
        self.calls: list[ScriptedCall] = []

    @property
    def successes(self) -> int:
        return len(self.calls)

    def total_tokens(self) -> tuple[int, int]:
        prompt = sum(whitespace_tokens(c.request_text) for c in self.calls)
        completion = sum(whitespace_tokens(c.response_text) for c in self.calls)
        return prompt, completion

    def invoke_once(self, messages: Sequence[Msg], **params: Any) -> ModelResponse:
        request_text = render_request(messages)
        with self._lock:
            self.attempts += 1
            state = None
            for st in self._rules:
                if st.used and not st.rule.repeat:
                    continue
                if st.rule.when_contains is not None and st.rule.when_contains not in request_text:
                    continue
                state = st
                break
            if state is None:
                raise ValidationError(
                    f"scripted backend {self.config_name!r} has no rule left matching request: "
                    f"{request_text[-200:]!r}"
                )
            if state.fails_left > 0:
                state.fails_left -= 1
                raise TransientError(
                    f"scripted failure from {self.config_name!r} ({state.fails_left} left)"
                )
            state.used = True
            delay = state.rule.delay_ms
            text = state.rule.respond
            self.calls.append(ScriptedCall(len(self.calls), request_text, text))
        if delay:
            time.sleep(delay / 1000.0)
        return ModelResponse(
            text=text,
            token_usage={
                "prompt": whitespace_tokens(request_text),
                "completion": whitespace_tokens(text),
            },
            raw={"rule": state.rule, "request_text": request_text},
        )


class HttpChatModel(ChatBackend):
    """Generic client for chat-completions-shaped HTTP endpoints.

    Posts ``{"model", "messages": [{"role", "content"}, ...]}`` to the
    configured ``base_url`` and reads the first choice's message content.
    Connection problems and 408/429/5xx responses are transient; other
    client errors are not retryable.
    """

    TIMEOUT = 60.0

    def invoke_once(self, messages: Sequence[Msg], **params: Any) -> ModelResponse:
        import requests

        payload: dict[str, Any] = {
            "messages": [{"role": m.role, "content": m.content} for m in messages],
        }
        if self.config.model_id:
            payload["model"] = self.config.model_id
        payload.update(params)
        headers = {}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        try:
            resp = requests.post(
                self.config.base_url, json=payload, headers=headers, timeout=self.TIMEOUT
            )
        except requests.RequestException as e:
            raise TransientError(f"chat endpoint unreachable: {e}") from e
        if resp.status_code in (408, 429) or resp.status_code >= 500:
            raise TransientError(f"chat endpoint returned {resp.status_code}")
        if resp.status_code >= 400:
            raise AccessibilityError(
                f"chat endpoint rejected the request: {resp.status_code} {resp.text[:200]}",
                attempts=1,
            )
        body = resp.json()
        text = body["choices"][0]["message"]["content"]
        usage = body.get("usage", {})
        return ModelResponse(
            text=text,
            token_usage={
                "prompt": int(usage.get("prompt_tokens", 0)),
                "completion": int(usage.get("completion_tokens", 0)),
            },
            raw=body,
        )


class EmbeddingBackend:
    """Base class for embedding backends."""

    def __init__(self, config: ModelConfig):
        self.config = config

    @property
    def config_name(self) -> str:
        return self.config.config_name

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        raise NotImplementedError


class HashEmbeddingModel(EmbeddingBackend):
    """Deterministic offline embedder: hashed bag-of-words, L2-normalized.

    Each lowercase whitespace token is hashed (md5, process-stable) into
    one of ``dim`` buckets; the count vector is normalized to unit length.
    Identical text always produces an identical vector, which makes
    retrieval results exactly reproducible. ``call_count`` counts embed()
    invocations so tests can prove cached indexes skip recomputation.
    """

    def __init__(self, config: ModelConfig | None = None, dim: int = 64):
        if config is None:
            config = ModelConfig(config_name="hash-embedder", model_type="hash_embedding", dim=dim)
        super().__init__(config)
        self._dim = config.dim
        self._lock = threading.Lock()
        self.call_count = 0

    @property
    def dim(self) -> int:
        return self._dim

    def _embed_one(self, text: str) -> list[float]:
        vec = [0.0] * self._dim
        for token in text.lower().split():
            digest = hashlib.md5(token.encode("utf-8")).digest()
            idx = int.from_bytes(digest[:4], "little") % self._dim
            vec[idx] += 1.0
        norm = math.sqrt(sum(v * v for v in vec))
        if norm > 0:
            vec = [v / norm for v in vec]
        return vec

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        with self._lock:
            self.call_count += 1
        return [self._embed_one(t) for t in texts]


class HttpEmbeddingModel(EmbeddingBackend):
    """Client for embeddings-shaped HTTP endpoints (``{"input": [...]}``)."""

    TIMEOUT = 60.0
    _dim_cache: int | None = None

    @property
    def dim(self) -> int:
        if self._dim_cache is None:
            self._dim_cache = len(self.embed(["probe"])[0])
        return self._dim_cache

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        import requests

        payload: dict[str, Any] = {"input": list(texts)}
        if self.config.model_id:
            payload["model"] = self.config.model_id
        headers = {}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        try:
            resp = requests.post(
                self.config.base_url, json=payload, headers=headers, timeout=self.TIMEOUT
            )
        except requests.RequestException as e:
            raise TransientError(f"embedding endpoint unreachable: {e}") from e
        if resp.status_code in (408, 429) or resp.status_code >= 500:
            raise TransientError(f"embedding endpoint returned {resp.status_code}")
        resp.raise_for_status()
        body = resp.json()
        return [row["embedding"] for row in body["data"]]


def build_backend(config: ModelConfig):
    if config.model_type == "scripted":
        return ScriptedChatModel(config)
    if config.model_type == "http_chat":
        return HttpChatModel(config)
    if config.model_type == "http_embedding":
        return HttpEmbeddingModel(config)
    if config.model_type == "hash_embedding":
        return HashEmbeddingModel(config)
    raise ValidationError(f"no backend for model_type {config.model_type!r}")
