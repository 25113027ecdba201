"""Model backends, config registry, retry layer, and response parsers."""

from .config import (
    MODEL_TYPES,
    ModelConfig,
    ModelRegistry,
    ScriptedRule,
    get_backend,
    get_registry,
    register_configs,
    reset_registry,
)
from .backends import (
    ChatBackend,
    EmbeddingBackend,
    HashEmbeddingModel,
    HttpChatModel,
    HttpEmbeddingModel,
    ModelResponse,
    ScriptedChatModel,
    render_request,
    whitespace_tokens,
)
from .invoke import Backoff, invoke, invoke_with_parsing
from .parsing import parse_fenced, parse_json_block, parse_tagged, repair_json

__all__ = [
    "MODEL_TYPES",
    "ModelConfig",
    "ModelRegistry",
    "ScriptedRule",
    "get_backend",
    "get_registry",
    "register_configs",
    "reset_registry",
    "ChatBackend",
    "EmbeddingBackend",
    "HashEmbeddingModel",
    "HttpChatModel",
    "HttpEmbeddingModel",
    "ModelResponse",
    "ScriptedChatModel",
    "render_request",
    "whitespace_tokens",
    "Backoff",
    "invoke",
    "invoke_with_parsing",
    "parse_fenced",
    "parse_json_block",
    "parse_tagged",
    "repair_json",
]
