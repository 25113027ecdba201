"""Retrieval-augmented dialog agent."""

from __future__ import annotations

from typing import Sequence

from ..agents.base import AgentBase
from ..errors import ValidationError
from ..models import invoke
from ..msg import AnyMsg, Msg, as_msg
from .store import KnowledgeEntry, KnowledgeObject, fused_retrieve

_RECOMPOSE_TEMPLATE = (
    "Context retrieved so far:\n{context}\n\n"
    "Rewrite the search query to gather more comprehensive information for: {query}\n"
    "Respond with the rewritten query only."
)


def render_context(entries: Sequence[KnowledgeEntry]) -> str:
    """Render retrieved chunks as a prompt block, one per line, rank order."""
    return "\n".join(f"[{e.source_path}#{e.chunk_id}] {e.text}" for e in entries)


class RAGAgent(AgentBase):
    """Dialog agent that answers over retrieved knowledge.

    Each reply performs ``repeats`` retrieval rounds: the first queries
    with the incoming message, each later round asks the model to
    recompose the query given what was already retrieved. Retrieved
    chunks are deduplicated by chunk id, rendered into a context block,
    and prepended to the system prompt for the final answer call.
    """

    def __init__(
        self,
        name: str,
        sys_prompt: str = "",
        model_config_name: str | None = None,
        knowledge: Sequence[KnowledgeObject] | KnowledgeObject | None = None,
        weights: Sequence[float] | None = None,
        k: int = 5,
        repeats: int = 1,
        max_retries: int = 3,
    ):
        super().__init__(name, sys_prompt, model_config_name)
        if knowledge is None:
            objs: list[KnowledgeObject] = []
        elif isinstance(knowledge, KnowledgeObject):
            objs = [knowledge]
        else:
            objs = list(knowledge)
        if not objs:
            raise ValidationError(f"RAG agent {name!r} requires at least one knowledge object")
        if repeats < 1:
            raise ValidationError("repeats must be >= 1")
        self.knowledge = objs
        self.weights = list(weights) if weights is not None else [1.0] * len(objs)
        if len(self.weights) != len(objs):
            raise ValidationError("one weight per knowledge object required")
        self.k = k
        self.repeats = repeats
        self.max_retries = max_retries

    def _retrieve(self, query: str) -> list[tuple[KnowledgeEntry, float]]:
        if len(self.knowledge) == 1:
            return self.knowledge[0].retrieve(query, self.k)
        return fused_retrieve(list(zip(self.knowledge, self.weights)), query, self.k)

    def _recompose(self, original_query: str, entries: Sequence[KnowledgeEntry]) -> str:
        request = Msg(
            "system",
            _RECOMPOSE_TEMPLATE.format(context=render_context(entries), query=original_query),
            role="system",
        )
        resp = invoke(self.backend, [request], max_retries=self.max_retries)
        return resp.text

    def reply(self, x: AnyMsg | None = None, **kwargs) -> Msg:
        if x is None:
            raise ValidationError(f"RAG agent {self.name!r} needs an input message to answer")
        self.observe(x)
        query = as_msg(x).content

        selected: dict[str, KnowledgeEntry] = {}
        q = query
        for round_index in range(self.repeats):
            for entry, _score in self._retrieve(q):
                selected.setdefault(entry.chunk_id, entry)
            if round_index + 1 < self.repeats:
                q = self._recompose(query, list(selected.values()))

        context_block = render_context(list(selected.values()))
        system_text = (
            self.sys_prompt + "\n\nRetrieved context:\n" + context_block
            if self.sys_prompt
            else "Retrieved context:\n" + context_block
        )
        prompt = [Msg("system", system_text, role="system")] + list(self.memory)
        resp = invoke(self.backend, prompt, max_retries=self.max_retries)
        out = Msg(self.name, resp.text)
        self.observe(out)
        return out
