"""agentmesh: a message-passing multi-agent runtime.

Agents exchange immutable messages through direct calls, pipelines, and
broadcast hubs; model access is fault-tolerant and metered; tool use,
knowledge retrieval, and an actor-based distributed mode are built in;
workflow graphs in JSON can be validated, executed, or compiled to a
standalone program. A deterministic scripted backend makes every
mechanism testable without live model access.
"""

from __future__ import annotations

import random as _random

from .errors import AgentMeshError
from .msg import Msg, PlaceholderMsg, as_msg, deserialize_msg, serialize_msg
from . import agents, knowledge, models, monitor, pipelines, rpc, services, workflow
from .agents import DialogAgent, DictDialogAgent, EchoAgent, UserAgent, filter_agents
from .knowledge import KnowledgeBank, RAGAgent, bank_init
from .models import register_configs
from .pipelines import MsgHub, msghub, sequential
from .rpc import to_dist
from .services import ReActAgent, ServiceResponse, ServiceToolkit

__version__ = "0.1.0"


def init(
    model_configs=None,
    agent_configs=None,
    run_dir: str | None = None,
    seed: int | None = None,
) -> list:
    """One-call setup: register model configs, build configured agents.

    Returns the agents instantiated from ``agent_configs`` (empty list if
    none were given), in file order.
    """
    import os

    from .agents.config import build_agents
    from .monitor.files import RUN_DIR_ENV

    if run_dir is not None:
        os.environ[RUN_DIR_ENV] = str(run_dir)
    if seed is not None:
        _random.seed(seed)
    if model_configs is not None:
        register_configs(model_configs)
    if agent_configs is not None:
        return build_agents(agent_configs)
    return []


__all__ = [
    "AgentMeshError",
    "Msg",
    "PlaceholderMsg",
    "as_msg",
    "deserialize_msg",
    "serialize_msg",
    "agents",
    "knowledge",
    "models",
    "monitor",
    "pipelines",
    "rpc",
    "services",
    "workflow",
    "DialogAgent",
    "DictDialogAgent",
    "EchoAgent",
    "UserAgent",
    "filter_agents",
    "KnowledgeBank",
    "RAGAgent",
    "bank_init",
    "register_configs",
    "MsgHub",
    "msghub",
    "sequential",
    "to_dist",
    "ReActAgent",
    "ServiceResponse",
    "ServiceToolkit",
    "init",
    "__version__",
]
