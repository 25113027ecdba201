"""@-mention filtering for group conversations.

A mention is ``@`` followed by the agent's exact name (case-sensitive),
terminated by any character that cannot be part of a name. Names may
contain letters, digits, underscores, and hyphens, so ``@Bob`` inside
``@Bobby`` is not a mention of Bob.
"""

from __future__ import annotations

import string
from typing import Sequence

_NAME_CHARS = frozenset(string.ascii_letters + string.digits + "_-")


def _first_mention(content: str, name: str) -> int | None:
    token = "@" + name
    start = 0
    while True:
        i = content.find(token, start)
        if i == -1:
            return None
        end = i + len(token)
        if end >= len(content) or content[end] not in _NAME_CHARS:
            return i
        start = i + 1


def filter_agents(content: str, candidates: Sequence) -> list:
    """Return the candidates mentioned in ``content``.

    Order follows first occurrence in the text; each agent appears at most
    once. Candidates must have unique names.
    """
    seen: set[str] = set()
    hits: list[tuple[int, object]] = []
    for agent in candidates:
        name = agent.name
        if name in seen:
            continue
        seen.add(name)
        pos = _first_mention(content, name)
        if pos is not None:
            hits.append((pos, agent))
    hits.sort(key=lambda pair: pair[0])
    return [agent for _, agent in hits]
