"""Conversation logging with a dedicated CHAT level.

CHAT sits between INFO and WARNING so that agent dialogue survives a
filter that drops ordinary INFO chatter. Each CHAT record carries the full
serialized message plus its source, and can fan out to three sinks: a
human-readable stream (stderr or stdout) where every agent gets a stable
color, a JSONL file whose lines re-parse as messages, and a studio
emitter that forwards to a live console.
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path
from typing import IO, Any

from loguru import logger

from ..msg import AnyMsg, as_msg, canonical_json

CHAT_LEVEL = 25  # between INFO (20) and WARNING (30)

try:
    logger.level("CHAT")
except ValueError:
    logger.level("CHAT", no=CHAT_LEVEL, color="<cyan>")

# Palette of ANSI foreground codes; an agent's color is a stable hash of
# its name, so the same agent renders identically across a whole run.
_PALETTE = (31, 32, 33, 34, 35, 36, 91, 92, 93, 94, 95, 96)

_handler_ids: list[int] = []


def color_for(name: str) -> int:
    digest = hashlib.md5(name.encode("utf-8")).hexdigest()
    return _PALETTE[int(digest[:8], 16) % len(_PALETTE)]


def format_chat_line(m: AnyMsg, colorize: bool = False) -> str:
    r = as_msg(m)
    label = r.name
    if colorize:
        label = f"\x1b[{color_for(r.name)}m{r.name}\x1b[0m"
    line = f"{label}: {r.content}"
    if r.url:
        line += f" [{r.url}]"
    return line


def _human_sink(stream: IO[str], colorize: bool):
    def sink(message) -> None:
        record = message.record
        msg_dict = record["extra"].get("chat_msg")
        if msg_dict is not None:
            name = msg_dict["name"]
            label = f"\x1b[{color_for(name)}m{name}\x1b[0m" if colorize else name
            line = f"{label}: {msg_dict['content']}"
            if msg_dict.get("url"):
                line += f" [{msg_dict['url']}]"
        else:
            line = f"{record['level'].name}: {record['message']}"
        stream.write(line + "\n")
        stream.flush()

    return sink


def _jsonl_sink(path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)

    def sink(message) -> None:
        record = message.record
        msg_dict = record["extra"].get("chat_msg")
        if msg_dict is None:
            return
        row = dict(msg_dict)
        row["level"] = record["level"].name
        row["source"] = record["extra"].get("chat_source")
        with path.open("a", encoding="utf-8") as f:
            f.write(canonical_json(row) + "\n")

    return sink


def _studio_sink(studio_url: str):
    def sink(message) -> None:
        record = message.record
        msg_dict = record["extra"].get("chat_msg")
        if msg_dict is None:
            return
        from ..rpc import emit_to_studio_dict

        emit_to_studio_dict(studio_url, msg_dict, source=record["extra"].get("chat_source"))

    return sink


def configure_logging(
    level: str = "CHAT",
    *,
    stream: IO[str] | None = None,
    jsonl_path: str | Path | None = None,
    studio_url: str | None = None,
    colorize: bool | None = None,
) -> None:
    """Replace this module's sinks.

    ``level`` filters by severity (``"CHAT"`` keeps CHAT and WARNING but
    drops INFO). ``stream`` defaults to stderr; color is applied only when
    the stream is a terminal unless ``colorize`` forces it.
    """
    global _handler_ids
    # Take ownership of the global logger: drop the default handler and
    # anything configured earlier, then install our sinks.
    logger.remove()
    _handler_ids = []

    out = stream if stream is not None else sys.stderr
    use_color = colorize if colorize is not None else bool(getattr(out, "isatty", lambda: False)())
    _handler_ids.append(logger.add(_human_sink(out, use_color), level=level))
    if jsonl_path is not None:
        _handler_ids.append(logger.add(_jsonl_sink(Path(jsonl_path)), level=level))
    if studio_url is not None:
        _handler_ids.append(logger.add(_studio_sink(studio_url), level=level))


def log_chat(m: AnyMsg, source: str | None = None) -> None:
    """Emit one CHAT record carrying the full serialized message."""
    r = as_msg(m)
    logger.bind(chat_msg=r.to_dict(), chat_source=source).log("CHAT", "{name}: {content}", name=r.name, content=r.content)


def log_event(level: str, message: str, **kwargs: Any) -> None:
    logger.log(level, message, **kwargs)
