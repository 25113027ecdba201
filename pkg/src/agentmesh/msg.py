"""Message data model.

A ``Msg`` is the unit of communication between agents: author name, role,
text content, an optional media URL, and an open metadata map, stamped
with a unique id and a UTC timestamp. Messages are immutable after
construction and safe to share across threads.

``PlaceholderMsg`` is the deferred variant produced by calls to remote
agents: it carries the coordinates needed to fetch the real message later
and resolves transparently on first field access.

Serialization is canonical JSON (sorted keys, no insignificant
whitespace) so that serialized transcripts can be compared or hashed
byte-for-byte.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from datetime import datetime, timezone
from typing import Any, Iterable, Mapping, Union

from .errors import DeserializationError, ValidationError

ROLES = ("system", "user", "assistant")

# Sender clock, guarded so timestamps never decrease within one process
# even if the wall clock steps backwards.
_ts_lock = threading.Lock()
_last_ts = 0.0


def _next_timestamp() -> str:
    global _last_ts
    with _ts_lock:
        now = max(time.time(), _last_ts)
        _last_ts = now
    dt = datetime.fromtimestamp(now, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.") + f"{dt.microsecond // 1000:03d}Z"


def canonical_json(value: Any) -> str:
    """Serialize ``value`` with sorted keys and no insignificant whitespace."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


class Msg:
    """One message exchanged between agents.

    ``name`` identifies the author and must be non-empty; ``content`` may
    be empty. ``role`` defaults to ``assistant``. ``url`` optionally points
    at media stored elsewhere (the payload itself is never embedded, so
    message size stays independent of artifact size). ``metadata`` absorbs
    application-specific keys (string keys, JSON-representable values).
    """

    __slots__ = ("id", "timestamp", "name", "role", "content", "url", "metadata")

    def __init__(
        self,
        name: str,
        content: str = "",
        role: str = "assistant",
        url: str | None = None,
        metadata: Mapping[str, Any] | None = None,
        *,
        id: str | None = None,
        timestamp: str | None = None,
    ):
        if not name:
            raise ValidationError("message name must be a non-empty string")
        if role not in ROLES:
            raise ValidationError(f"invalid role {role!r}; expected one of {ROLES}")
        meta = dict(metadata or {})
        for key in meta:
            if not isinstance(key, str):
                raise ValidationError(f"metadata keys must be strings, got {key!r}")
        object.__setattr__(self, "id", id if id is not None else uuid.uuid4().hex)
        object.__setattr__(self, "timestamp", timestamp if timestamp is not None else _next_timestamp())
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "role", role)
        object.__setattr__(self, "content", content)
        object.__setattr__(self, "url", url)
        object.__setattr__(self, "metadata", meta)

    def __setattr__(self, key, value):
        raise AttributeError("Msg is immutable after construction")

    def __eq__(self, other):
        if not isinstance(other, Msg):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(self.id)

    def __repr__(self):
        text = self.content if len(self.content) <= 40 else self.content[:37] + "..."
        return f"Msg(name={self.name!r}, role={self.role!r}, content={text!r})"

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "timestamp": self.timestamp,
            "name": self.name,
            "role": self.role,
            "content": self.content,
            "url": self.url,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Msg":
        for field in ("name", "role", "content", "id", "timestamp"):
            if field not in data:
                raise DeserializationError(f"missing field: {field}")
        if data["role"] not in ROLES:
            raise DeserializationError(f"malformed field: role ({data['role']!r})")
        return cls(
            name=data["name"],
            content=data["content"],
            role=data["role"],
            url=data.get("url"),
            metadata=data.get("metadata") or {},
            id=data["id"],
            timestamp=data["timestamp"],
        )


class PlaceholderMsg:
    """A deferred message returned immediately by a distributed call.

    Holds the coordinates (``task_id``, ``host``, ``port``) needed to fetch
    the real message from the agent server that is computing it. Field
    access (``content``, ``name``, ...) blocks on first use until the value
    is available; afterwards access is local. Resolution is idempotent and
    internally synchronized: concurrent readers trigger one network fetch.
    """

    def __init__(self, task_id: str, host: str, port: int):
        if not 1 <= int(port) <= 65535:
            raise ValidationError(f"port out of range: {port}")
        self.task_id = task_id
        self.host = host
        self.port = int(port)
        self.resolved: Msg | None = None
        self._lock = threading.Lock()

    def _ensure_resolved(self) -> Msg:
        if self.resolved is None:
            # Resolution machinery lives in the rpc module; imported lazily
            # to keep the message model dependency-free.
            from .rpc import resolve

            resolve(self)
        assert self.resolved is not None
        return self.resolved

    @property
    def name(self) -> str:
        return self._ensure_resolved().name

    @property
    def content(self) -> str:
        return self._ensure_resolved().content

    @property
    def role(self) -> str:
        return self._ensure_resolved().role

    @property
    def url(self) -> str | None:
        return self._ensure_resolved().url

    @property
    def metadata(self) -> dict[str, Any]:
        return self._ensure_resolved().metadata

    def to_dict(self) -> dict[str, Any]:
        return {
            "__placeholder__": True,
            "task_id": self.task_id,
            "host": self.host,
            "port": self.port,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PlaceholderMsg":
        for field in ("task_id", "host", "port"):
            if field not in data:
                raise DeserializationError(f"missing field: {field}")
        return cls(task_id=data["task_id"], host=data["host"], port=data["port"])

    def __eq__(self, other):
        if not isinstance(other, PlaceholderMsg):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self):
        state = "resolved" if self.resolved is not None else "pending"
        return f"PlaceholderMsg(task_id={self.task_id!r}, {self.host}:{self.port}, {state})"


AnyMsg = Union[Msg, PlaceholderMsg]


def serialize_msg(m: AnyMsg) -> str:
    """Serialize a message (or placeholder) to canonical JSON.

    Placeholders serialize to their coordinate form with the
    ``__placeholder__`` marker so receivers never mistake one for a
    resolved message.
    """
    return canonical_json(m.to_dict())


def deserialize_msg(s: str | Mapping[str, Any]) -> AnyMsg:
    """Inverse of :func:`serialize_msg`; raises naming any missing field."""
    if isinstance(s, str):
        try:
            data = json.loads(s)
        except json.JSONDecodeError as e:
            raise DeserializationError(f"not valid JSON: {e}") from e
    else:
        data = s
    if not isinstance(data, dict):
        raise DeserializationError("expected a JSON object")
    if data.get("__placeholder__"):
        return PlaceholderMsg.from_dict(data)
    return Msg.from_dict(data)


def as_msg(x: AnyMsg | None) -> Msg | None:
    """Return the concrete message behind ``x``, resolving placeholders."""
    if x is None or isinstance(x, Msg):
        return x
    if isinstance(x, PlaceholderMsg):
        return x._ensure_resolved()
    raise ValidationError(f"expected a message, got {type(x).__name__}")


def transcript_pairs(msgs: Iterable[AnyMsg]) -> list[tuple[str, str]]:
    """Project messages to (name, content) pairs, resolving placeholders.

    This is the identity-free view used to compare transcripts across
    runs, where ids and timestamps necessarily differ.
    """
    out = []
    for m in msgs:
        r = as_msg(m)
        out.append((r.name, r.content))
    return out


def serialize_transcript(msgs: Iterable[AnyMsg]) -> str:
    """Canonical JSON of a transcript with volatile fields stripped.

    Two runs of the same deterministic workflow serialize byte-identically
    under this projection (ids and timestamps are excluded).
    """
    rows = []
    for m in msgs:
        r = as_msg(m)
        rows.append(
            {
                "name": r.name,
                "role": r.role,
                "content": r.content,
                "url": r.url,
                "metadata": r.metadata,
            }
        )
    return canonical_json(rows)
