"""Deterministic fixed-window text chunking.

Documents are split into character windows of ``chunk_size`` advancing by
``chunk_size - chunk_overlap``; the final window may be shorter. The
split is purely positional, so re-chunking identical text always yields
identical spans, which keeps indexes reproducible.
"""

from __future__ import annotations

from ..errors import ValidationError


def chunk_text(text: str, chunk_size: int, chunk_overlap: int = 0) -> list[tuple[int, int, str]]:
    """Return ``(start, end, piece)`` windows covering ``text``."""
    if chunk_size <= 0:
        raise ValidationError("chunk_size must be positive")
    if not 0 <= chunk_overlap < chunk_size:
        raise ValidationError("chunk_overlap must satisfy 0 <= overlap < chunk_size")
    if not text:
        return []
    step = chunk_size - chunk_overlap
    out: list[tuple[int, int, str]] = []
    start = 0
    while True:
        end = min(start + chunk_size, len(text))
        out.append((start, end, text[start:end]))
        if end >= len(text):
            return out
        start += step
