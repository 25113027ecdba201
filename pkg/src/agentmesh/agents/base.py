"""Agent abstraction.

An agent is an actor with two behaviors: ``reply`` consumes an optional
message and produces one, ``observe`` consumes a message without
responding. Every agent keeps an ordered memory of the messages it has
seen and produced. Calls to the same instance are serialized by a
per-agent lock (actor semantics); distinct agents run concurrently.

Subclassing an :class:`AgentBase` automatically registers the class by
name (so agent configs and remote servers can instantiate it) and records
constructor arguments (so an instance can be re-created on a remote
machine).
"""

from __future__ import annotations

import functools
import inspect
import threading
from typing import Any, Iterable

from ..errors import ValidationError
from ..msg import AnyMsg, Msg, PlaceholderMsg, as_msg

AGENT_CLASSES: dict[str, type] = {}


def register_agent_class(cls: type, name: str | None = None) -> type:
    # Last registration wins: redefining a class (e.g. in a REPL or test)
    # simply replaces the earlier binding.
    AGENT_CLASSES[name or cls.__name__] = cls
    return cls


def get_agent_class(name: str) -> type:
    cls = AGENT_CLASSES.get(name)
    if cls is None:
        raise ValidationError(
            f"unknown agent class {name!r}; registered: {sorted(AGENT_CLASSES)}"
        )
    return cls


def _capture_init_kwargs(init):
    """Wrap ``__init__`` to record the caller's explicit arguments."""

    @functools.wraps(init)
    def wrapper(self, *args, **kwargs):
        if not hasattr(self, "_init_kwargs"):
            try:
                bound = inspect.signature(init).bind(self, *args, **kwargs)
                captured: dict[str, Any] = {}
                params = inspect.signature(init).parameters
                for pname, value in bound.arguments.items():
                    if pname == "self":
                        continue
                    if params[pname].kind is inspect.Parameter.VAR_KEYWORD:
                        captured.update(value)
                    else:
                        captured[pname] = value
                self._init_kwargs = captured
            except TypeError:
                self._init_kwargs = {}
        init(self, *args, **kwargs)

    wrapper._captures_init = True
    return wrapper


class AgentBase:
    """Base class for all agents.

    ``name`` is the author stamped on every message the agent emits and
    must be unique within one runtime. ``sys_prompt`` seeds the model
    prompt for model-backed subclasses. Memory preserves insertion order
    and grows by exactly one entry per observed or produced message.
    """

    def __init__(self, name: str, sys_prompt: str = "", model_config_name: str | None = None):
        if not name:
            raise ValidationError("agent name must be non-empty")
        self.name = name
        self.sys_prompt = sys_prompt
        self.model_config_name = model_config_name
        self.memory: list[Msg] = []
        self._backend = None
        self._reply_lock = threading.RLock()
        self._hub = None  # set while participating in a msghub

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if "__init__" in cls.__dict__ and not getattr(cls.__init__, "_captures_init", False):
            cls.__init__ = _capture_init_kwargs(cls.__dict__["__init__"])
        register_agent_class(cls)

    @property
    def backend(self):
        """The chat backend bound via ``model_config_name``, resolved lazily."""
        if self._backend is None:
            if self.model_config_name is None:
                raise ValidationError(f"agent {self.name!r} has no model_config_name")
            from ..models import get_backend

            self._backend = get_backend(self.model_config_name)
        return self._backend

    def observe(self, x: AnyMsg | Iterable[AnyMsg]) -> None:
        """Append incoming message(s) to memory without replying.

        Placeholders are resolved before they are stored, so memory only
        ever holds concrete messages.
        """
        if isinstance(x, (Msg, PlaceholderMsg)):
            items = [x]
        else:
            items = list(x)
        for item in items:
            self.memory.append(as_msg(item))

    def reply(self, x: AnyMsg | None = None, **kwargs) -> Msg:
        raise NotImplementedError

    def __call__(self, x: AnyMsg | None = None, **kwargs) -> AnyMsg:
        with self._reply_lock:
            out = self.reply(x, **kwargs)
        hub = self._hub
        if hub is not None:
            hub._deliver(self, out)
        return out

    def clear_memory(self) -> None:
        self.memory.clear()

    def init_kwargs(self) -> dict[str, Any]:
        """Constructor arguments captured for remote re-instantiation."""
        return dict(getattr(self, "_init_kwargs", {}))

    def __repr__(self):
        return f"{type(self).__name__}(name={self.name!r})"


# Capture on the base constructor too, so subclasses that inherit it
# (no __init__ of their own) still record their construction arguments.
AgentBase.__init__ = _capture_init_kwargs(AgentBase.__init__)


class EchoAgent(AgentBase):
    """Identity agent: replies with the incoming content verbatim.

    No model involved; useful as a deterministic workflow building block.
    """

    def reply(self, x: AnyMsg | None = None, **kwargs) -> Msg:
        if x is not None:
            self.observe(x)
        content = as_msg(x).content if x is not None else ""
        out = Msg(self.name, content)
        self.observe(out)
        return out
