"""Model configuration registry.

Configs are declared in JSON (or passed as dicts) and addressed by a
unique ``config_name``. Backends are built lazily from their config and
cached, so every agent naming the same config shares one backend
instance. ``${VAR}`` references in ``api_key``/``base_url`` are expanded
from the environment at registration time.
"""

from __future__ import annotations

import json
import os
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from ..errors import ValidationError

MODEL_TYPES = ("http_chat", "http_embedding", "scripted", "hash_embedding")

_ENV_REF = re.compile(r"\$\{(\w+)\}")


def _expand_env(value: str | None) -> str | None:
    if value is None:
        return None
    return _ENV_REF.sub(lambda m: os.environ.get(m.group(1), m.group(0)), value)


@dataclass
class ScriptedRule:
    """One rule of a scripted backend's response script.

    Rules are matched first-match in order; ``when_contains`` of None
    matches any request. ``fail_times`` simulates transient backend
    failures before the rule finally answers. A non-``repeat`` rule is
    consumed by its first successful response.
    """

    respond: str = ""
    when_contains: str | None = None
    fail_times: int = 0
    delay_ms: int = 0
    repeat: bool = False

    def __post_init__(self):
        if self.fail_times < 0:
            raise ValidationError("fail_times must be >= 0")
        if self.delay_ms < 0:
            raise ValidationError("delay_ms must be >= 0")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScriptedRule":
        unknown = set(data) - {"respond", "when_contains", "fail_times", "delay_ms", "repeat"}
        if unknown:
            raise ValidationError(f"unknown scripted rule keys: {sorted(unknown)}")
        return cls(**data)


@dataclass
class ModelConfig:
    config_name: str
    model_type: str
    base_url: str | None = None
    api_key: str | None = None
    model_id: str | None = None
    script: list[ScriptedRule] = field(default_factory=list)
    price_per_1k_tokens: float | None = None
    dim: int = 64  # embedding dimension for hash_embedding backends

    def __post_init__(self):
        if not self.config_name:
            raise ValidationError("config_name must be non-empty")
        if self.model_type not in MODEL_TYPES:
            raise ValidationError(
                f"unknown model_type {self.model_type!r} for config {self.config_name!r}; "
                f"expected one of {MODEL_TYPES}"
            )
        if self.model_type in ("http_chat", "http_embedding") and not self.base_url:
            raise ValidationError(f"config {self.config_name!r} ({self.model_type}) requires base_url")
        self.base_url = _expand_env(self.base_url)
        self.api_key = _expand_env(self.api_key)
        self.script = [
            r if isinstance(r, ScriptedRule) else ScriptedRule.from_dict(r) for r in self.script
        ]

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"config_name": self.config_name, "model_type": self.model_type}
        if self.base_url is not None:
            out["base_url"] = self.base_url
        if self.api_key is not None:
            out["api_key"] = self.api_key
        if self.model_id is not None:
            out["model_id"] = self.model_id
        if self.script:
            out["script"] = [
                {
                    k: v
                    for k, v in (
                        ("respond", r.respond),
                        ("when_contains", r.when_contains),
                        ("fail_times", r.fail_times),
                        ("delay_ms", r.delay_ms),
                        ("repeat", r.repeat),
                    )
                    if v not in (None, 0, False) or k == "respond"
                }
                for r in self.script
            ]
        if self.price_per_1k_tokens is not None:
            out["price_per_1k_tokens"] = self.price_per_1k_tokens
        if self.model_type == "hash_embedding" and self.dim != 64:
            out["dim"] = self.dim
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ModelConfig":
        known = {
            "config_name",
            "model_type",
            "base_url",
            "api_key",
            "model_id",
            "script",
            "price_per_1k_tokens",
            "dim",
        }
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**data)


class ModelRegistry:
    """Maps config names to configs and lazily-built backend instances.

    Read-mostly: registration happens at startup, lookups afterwards are
    safe from any thread.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._configs: dict[str, ModelConfig] = {}
        self._backends: dict[str, Any] = {}

    def register(self, configs: Iterable[ModelConfig | dict]) -> None:
        parsed = [c if isinstance(c, ModelConfig) else ModelConfig.from_dict(c) for c in configs]
        with self._lock:
            for cfg in parsed:
                if cfg.config_name in self._configs:
                    raise ValidationError(f"duplicate model config_name: {cfg.config_name!r}")
                self._configs[cfg.config_name] = cfg

    def get_config(self, config_name: str) -> ModelConfig:
        with self._lock:
            cfg = self._configs.get(config_name)
        if cfg is None:
            raise ValidationError(f"unknown model config: {config_name!r}")
        return cfg

    def config_names(self) -> list[str]:
        with self._lock:
            return list(self._configs)

    def get_backend(self, config_name: str):
        from .backends import build_backend

        with self._lock:
            backend = self._backends.get(config_name)
            if backend is None:
                cfg = self._configs.get(config_name)
                if cfg is None:
                    raise ValidationError(f"unknown model config: {config_name!r}")
                backend = build_backend(cfg)
                self._backends[config_name] = backend
            return backend

    def reset(self) -> None:
        with self._lock:
            self._configs.clear()
            self._backends.clear()


_registry = ModelRegistry()


def get_registry() -> ModelRegistry:
    return _registry


def reset_registry() -> None:
    _registry.reset()


def register_configs(
    source: str | Path | Iterable[ModelConfig | dict],
    registry: ModelRegistry | None = None,
) -> ModelRegistry:
    """Register configs from a JSON file path or an in-memory list."""
    reg = registry or _registry
    if isinstance(source, (str, Path)):
        path = Path(source)
        if not path.exists():
            raise ValidationError(f"model config file not found: {path}")
        data = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(data, list):
            raise ValidationError("model config file must contain a JSON array")
        reg.register(data)
    else:
        reg.register(source)
    return reg


def get_backend(config_name: str, registry: ModelRegistry | None = None):
    return (registry or _registry).get_backend(config_name)
