"""Response parsers and rule-based JSON repair.

Models frequently return almost-valid structured output: JSON wrapped in
prose or Markdown fences, unclosed braces, trailing commas. The repair
rules here fix exactly that class of format error deterministically,
without re-invoking the model. Three parser families are provided:
Markdown fenced blocks, JSON object blocks, and customizable tagged
contents.
"""

from __future__ import annotations

import json
import re
from typing import Any, Iterable, Sequence

from ..errors import ParseError, RuleResolvableError, ValidationError

_FENCE_RE = re.compile(r"```([A-Za-z0-9_+-]*)[ \t]*\r?\n?(.*?)```", re.DOTALL)

_CLOSER_OF = {"{": "}", "[": "]"}


def _first_fence(text: str, language_tag: str | None) -> str | None:
    for m in _FENCE_RE.finditer(text):
        if language_tag is None or m.group(1) == language_tag:
            return m.group(2)
    return None


def parse_fenced(text: str, language_tag: str | None = None) -> str:
    """Return the first Markdown fenced code block's interior.

    With ``language_tag`` set, only fences tagged exactly that way match.
    """
    body = _first_fence(text, language_tag)
    if body is None:
        what = f"no fenced block tagged {language_tag!r}" if language_tag else "no fenced block"
        raise ParseError(what)
    return body.strip()


def _balance(s: str) -> str:
    """Append the closers needed to balance braces/brackets.

    String literals and escapes are respected. A mismatched closer (e.g.
    ``}`` closing a ``[``) is beyond what rules can fix, so the text is
    returned unchanged and left for the parser to reject.
    """
    stack: list[str] = []
    in_str = False
    esc = False
    for ch in s:
        if in_str:
            if esc:
                esc = False
            elif ch == "\\":
                esc = True
            elif ch == '"':
                in_str = False
            continue
        if ch == '"':
            in_str = True
        elif ch in "{[":
            stack.append(ch)
        elif ch in "}]":
            if not stack or _CLOSER_OF[stack[-1]] != ch:
                return s
            stack.pop()
    out = s
    if in_str:
        out += '"'
    for opener in reversed(stack):
        out += _CLOSER_OF[opener]
    return out


def _strip_trailing_commas(s: str) -> str:
    """Remove commas that directly precede a closer, outside strings."""
    out: list[str] = []
    in_str = False
    esc = False
    n = len(s)
    for i, ch in enumerate(s):
        if in_str:
            out.append(ch)
            if esc:
                esc = False
            elif ch == "\\":
                esc = True
            elif ch == '"':
                in_str = False
            continue
        if ch == '"':
            in_str = True
            out.append(ch)
            continue
        if ch == ",":
            j = i + 1
            while j < n and s[j] in " \t\r\n":
                j += 1
            if j < n and s[j] in "}]":
                continue
        out.append(ch)
    return "".join(out)


def repair_json(text: str) -> Any:
    """Parse JSON out of model output, applying repair rules if needed.

    Input that already parses as strict JSON is returned unchanged. For
    anything else the rules run in order: (1) take the first fenced
    block's interior if one exists, (2) trim to the outermost brace or
    bracket, (3) append missing closers (string-aware), (4) drop trailing
    commas before closers. If the result still does not parse, a
    :class:`RuleResolvableError` carries the post-repair text.
    """
    if not isinstance(text, str):
        raise ValidationError("repair_json expects a string")
    try:
        return json.loads(text)
    except ValueError:
        pass

    s = text
    fence = _first_fence(s, None)
    if fence is None:
        fence = _first_fence(s, "json")
    if fence is not None:
        s = fence

    opens = [i for i in (s.find("{"), s.find("[")) if i != -1]
    if opens:
        first = min(opens)
        last = max(s.rfind("}"), s.rfind("]"))
        s = s[first : last + 1] if last > first else s[first:]

    s = _balance(s)
    s = _strip_trailing_commas(s)
    try:
        return json.loads(s)
    except ValueError as e:
        raise RuleResolvableError(f"could not repair to valid JSON: {e}", text=s) from e


def parse_json_block(text: str) -> dict[str, Any]:
    """Extract a JSON object from a (possibly fenced) model reply."""
    value = repair_json(text)
    if not isinstance(value, dict):
        raise ParseError(f"expected a JSON object, got {type(value).__name__}")
    return value


def _tag_name(open_tag: str) -> str:
    return open_tag.strip("[]<>/ ")


def parse_tagged(text: str, tags: Sequence[tuple[str, str]] | Iterable[tuple[str, str]]) -> dict[str, str]:
    """Extract the interior of every (open, close) tag pair.

    Tag pairs are literal, non-overlapping markers such as
    ``("[thought]", "[/thought]")``. All requested pairs must be present;
    otherwise the error lists every missing tag.
    """
    result: dict[str, str] = {}
    missing: list[str] = []
    for open_tag, close_tag in tags:
        name = _tag_name(open_tag)
        i = text.find(open_tag)
        if i == -1:
            missing.append(name)
            continue
        start = i + len(open_tag)
        j = text.find(close_tag, start)
        if j == -1:
            missing.append(name)
            continue
        result[name] = text[start:j]
    if missing:
        raise ParseError("missing tags: " + ", ".join(missing))
    return result
