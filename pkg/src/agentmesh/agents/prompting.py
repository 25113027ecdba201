"""System-prompt generation and in-context demonstration selection."""

from __future__ import annotations

import json
import math
import random
from pathlib import Path
from typing import Sequence

from ..errors import ValidationError
from ..models import invoke
from ..msg import Msg

APPROACHES = ("random", "similar_question", "similar_answer")

# The description is embedded verbatim so tests can assert containment on
# the outbound request.
SYS_PROMPT_TEMPLATE = (
    "You are an expert at writing system prompts for AI agents.\n"
    "Write a complete, detailed system prompt for an agent described as: {description}\n"
    "Reply with the system prompt text only."
)


def generate_sys_prompt(description: str, backend, max_retries: int = 3) -> str:
    """Elaborate a one-line agent description into a full system prompt."""
    if not description:
        raise ValidationError("agent description must be non-empty")
    request = Msg("system", SYS_PROMPT_TEMPLATE.format(description=description), role="system")
    resp = invoke(backend, [request], max_retries=max_retries)
    return resp.text


def _normalize_demos(demos: Sequence) -> list[tuple[str, str]]:
    out = []
    for d in demos:
        if isinstance(d, dict):
            out.append((d["question"], d["answer"]))
        else:
            q, a = d
            out.append((q, a))
    return out


def _cosine(a: Sequence[float], b: Sequence[float]) -> float:
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(y * y for y in b))
    if na == 0 or nb == 0:
        return 0.0
    return dot / (na * nb)


def select_demos(
    demos: Sequence,
    query: str,
    approach: str = "random",
    k: int = 1,
    seed: int = 0,
    embedder=None,
) -> list[tuple[str, str]]:
    """Pick ``k`` demonstrations for in-context learning.

    ``random`` is deterministic under ``seed``; the similarity approaches
    rank by cosine similarity between the query and the demo's question or
    answer, breaking ties by original index.
    """
    pairs = _normalize_demos(demos)
    if approach not in APPROACHES:
        raise ValidationError(f"unknown matching approach {approach!r}; expected one of {APPROACHES}")
    if k > len(pairs):
        raise ValidationError(f"k={k} exceeds available demos ({len(pairs)})")
    if approach == "random":
        rng = random.Random(seed)
        return [pairs[i] for i in rng.sample(range(len(pairs)), k)]
    if embedder is None:
        from ..models import HashEmbeddingModel

        embedder = HashEmbeddingModel()
    field = 0 if approach == "similar_question" else 1
    texts = [query] + [p[field] for p in pairs]
    vectors = embedder.embed(texts)
    qv = vectors[0]
    scored = [(-_cosine(qv, vectors[i + 1]), i) for i in range(len(pairs))]
    scored.sort()
    return [pairs[i] for _, i in scored[:k]]


def format_demo_block(pairs: Sequence[tuple[str, str]]) -> str:
    lines = ["Examples:"]
    for q, a in pairs:
        lines.append(f"Q: {q}")
        lines.append(f"A: {a}")
    return "\n".join(lines)


def load_demo_data(path: str | Path) -> list[tuple[str, str]]:
    """Load question/answer demos from a JSON array or JSONL file."""
    text = Path(path).read_text(encoding="utf-8").strip()
    if not text:
        return []
    if text.startswith("["):
        return _normalize_demos(json.loads(text))
    return _normalize_demos([json.loads(line) for line in text.splitlines() if line.strip()])
