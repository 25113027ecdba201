"""Agent abstraction, built-in agents, and prompt helpers."""

from .base import AGENT_CLASSES, AgentBase, EchoAgent, get_agent_class, register_agent_class
from .config import AgentConfig, build_agents, load_agent_configs
from .dialog import DialogAgent, DictDialogAgent, TextToImageAgent
from .mentions import filter_agents
from .prompting import (
    format_demo_block,
    generate_sys_prompt,
    load_demo_data,
    select_demos,
)
from .user import InputSource, QueueInput, StudioInput, TerminalInput, UserAgent

__all__ = [
    "AGENT_CLASSES",
    "AgentBase",
    "EchoAgent",
    "get_agent_class",
    "register_agent_class",
    "AgentConfig",
    "build_agents",
    "load_agent_configs",
    "DialogAgent",
    "DictDialogAgent",
    "TextToImageAgent",
    "filter_agents",
    "format_demo_block",
    "generate_sys_prompt",
    "load_demo_data",
    "select_demos",
    "InputSource",
    "QueueInput",
    "StudioInput",
    "TerminalInput",
    "UserAgent",
]
