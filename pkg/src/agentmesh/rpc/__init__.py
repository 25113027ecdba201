"""Actor-based distributed mode: agent server, remote proxies, placeholders."""

from .client import (
    LaunchedServer,
    RemoteAgentProxy,
    emit_to_studio,
    emit_to_studio_dict,
    launch_local_server,
    register_with_studio,
    resolve,
    to_dist,
    wait_healthy,
)
from .server import AgentServer

__all__ = [
    "LaunchedServer",
    "RemoteAgentProxy",
    "emit_to_studio",
    "emit_to_studio_dict",
    "launch_local_server",
    "register_with_studio",
    "resolve",
    "to_dist",
    "wait_healthy",
    "AgentServer",
]
