"""Knowledge banks, retrieval, and RAG agents."""

from .agent import RAGAgent, render_context
from .bank import KnowledgeBank, bank_init
from .chunker import chunk_text
from .store import (
    DirectoryWatcher,
    KnowledgeEntry,
    KnowledgeObject,
    fused_retrieve,
    update_knowledge,
    watch_dir,
)

__all__ = [
    "RAGAgent",
    "render_context",
    "KnowledgeBank",
    "bank_init",
    "chunk_text",
    "DirectoryWatcher",
    "KnowledgeEntry",
    "KnowledgeObject",
    "fused_retrieve",
    "update_knowledge",
    "watch_dir",
]
