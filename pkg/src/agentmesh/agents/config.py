"""Agent configuration loading.

An agent config names a registered agent class and the arguments to
construct it with. Unknown argument keys are passed through untouched;
the class decides what it accepts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from ..errors import ValidationError
from .base import get_agent_class


@dataclass
class AgentConfig:
    agent_class: str
    args: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.agent_class:
            raise ValidationError("agent_class must be non-empty")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "AgentConfig":
        if "agent_class" not in data:
            raise ValidationError("agent config missing field: agent_class")
        return cls(agent_class=data["agent_class"], args=dict(data.get("args", {})))

    def to_dict(self) -> dict[str, Any]:
        return {"agent_class": self.agent_class, "args": dict(self.args)}

    def build(self):
        cls = get_agent_class(self.agent_class)
        return cls(**self.args)


def load_agent_configs(source: str | Path | Iterable[dict | AgentConfig]) -> list[AgentConfig]:
    if isinstance(source, (str, Path)):
        path = Path(source)
        if not path.exists():
            raise ValidationError(f"agent config file not found: {path}")
        data = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(data, list):
            raise ValidationError("agent config file must contain a JSON array")
    else:
        data = list(source)
    return [c if isinstance(c, AgentConfig) else AgentConfig.from_dict(c) for c in data]


def build_agents(source: str | Path | Iterable[dict | AgentConfig]) -> list:
    """Instantiate every agent described by ``source``, in order."""
    return [cfg.build() for cfg in load_agent_configs(source)]
