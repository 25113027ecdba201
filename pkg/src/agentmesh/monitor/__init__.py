"""Usage metering, budget alerts, CHAT logging, and the artifact store."""

from .usage import Budget, Monitor, UsageRecord, get_monitor, reset_monitor
from .files import artifact_dir, load_artifact, run_dir, save_artifact
from .chatlog import (
    CHAT_LEVEL,
    color_for,
    configure_logging,
    format_chat_line,
    log_chat,
)

__all__ = [
    "Budget",
    "Monitor",
    "UsageRecord",
    "get_monitor",
    "reset_monitor",
    "artifact_dir",
    "load_artifact",
    "run_dir",
    "save_artifact",
    "CHAT_LEVEL",
    "color_for",
    "configure_logging",
    "format_chat_line",
    "log_chat",
]
