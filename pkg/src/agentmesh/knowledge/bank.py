"""Knowledge banks: one-stop configuration for a set of knowledge objects.

A single JSON file describes every object: source directory, file
extensions, chunking granularity, embedder, and persist location. On
(re-)initialization, objects whose persist directory is intact are loaded
straight from disk, skipping all embedding computation.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable

from loguru import logger

from ..errors import ValidationError
from ..models.backends import EmbeddingBackend, HashEmbeddingModel
from .store import KnowledgeObject


class KnowledgeBank:
    """A collection of knowledge objects addressed by ``knowledge_id``.

    Agents may hold references to the originals (mutations are then
    shared) or take copies via ``get(..., copy=True)``, whose mutations
    never affect the bank's object.
    """

    def __init__(self):
        self.objects: dict[str, KnowledgeObject] = {}

    def add(self, obj: KnowledgeObject) -> KnowledgeObject:
        if obj.knowledge_id in self.objects:
            raise ValidationError(f"duplicate knowledge_id: {obj.knowledge_id!r}")
        self.objects[obj.knowledge_id] = obj
        return obj

    def get(self, knowledge_id: str, copy: bool = False) -> KnowledgeObject:
        obj = self.objects.get(knowledge_id)
        if obj is None:
            raise ValidationError(f"unknown knowledge_id: {knowledge_id!r}")
        return obj.clone() if copy else obj

    def ids(self) -> list[str]:
        return list(self.objects)


def _resolve_embedder(config_name: str | None) -> EmbeddingBackend:
    if config_name is None:
        return HashEmbeddingModel()
    from ..models import get_backend

    backend = get_backend(config_name)
    if not isinstance(backend, EmbeddingBackend):
        raise ValidationError(f"model config {config_name!r} is not an embedding backend")
    return backend


_REQUIRED_KEYS = ("knowledge_id", "directory", "extensions", "chunk_size", "chunk_overlap")


def bank_init(config: str | Path | Iterable[dict[str, Any]]) -> KnowledgeBank:
    """Build a knowledge bank from its one-stop JSON configuration.

    Each object config requires ``knowledge_id``, ``directory``,
    ``extensions``, ``chunk_size``, and ``chunk_overlap``; optional keys
    are ``embedder_config_name`` and ``persist_dir``. A directory that
    matches zero files produces a warning and an empty object, not an
    error.
    """
    if isinstance(config, (str, Path)):
        path = Path(config)
        if not path.exists():
            raise ValidationError(f"knowledge config file not found: {path}")
        data = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(data, list):
            raise ValidationError("knowledge config must be a JSON array of object configs")
    else:
        data = list(config)

    bank = KnowledgeBank()
    for item in data:
        missing = [key for key in _REQUIRED_KEYS if key not in item]
        if missing:
            raise ValidationError(f"knowledge config missing keys: {missing}")
        embedder = _resolve_embedder(item.get("embedder_config_name"))
        persist_dir = item.get("persist_dir")

        if persist_dir and KnowledgeObject.is_intact(persist_dir):
            obj = KnowledgeObject.load(persist_dir, embedder=embedder)
            if obj.knowledge_id != item["knowledge_id"]:
                raise ValidationError(
                    f"persist_dir {persist_dir} belongs to {obj.knowledge_id!r}, "
                    f"config says {item['knowledge_id']!r}"
                )
            bank.add(obj)
            continue

        obj = KnowledgeObject(item["knowledge_id"], embedder=embedder, persist_dir=persist_dir)
        count = obj.build_from_directory(
            item["directory"], item["extensions"], item["chunk_size"], item["chunk_overlap"]
        )
        if count == 0:
            logger.warning(
                "knowledge object {} matched no files under {} (extensions {})",
                item["knowledge_id"],
                item["directory"],
                item["extensions"],
            )
        if persist_dir:
            obj.persist()
        bank.add(obj)
    return bank
