"""Service functions, the service toolkit, and reasoning-acting agents."""

from .response import ServiceExecStatus, ServiceResponse
from .toolkit import (
    FINISH_TOOL,
    FunctionCall,
    ServiceToolkit,
    ToolCall,
    ToolSpec,
    execute_tool_call,
    parse_tool_call,
    render_tool_call,
    service,
)
from .builtin import (
    BUILTIN_SERVICES,
    HttpSearchEngine,
    SearchEngine,
    StaticSearchEngine,
    evaluate_arithmetic,
    get_builtin_service,
    keyword_search_corpus,
    read_text_file,
    register_search_engine,
    web_search,
    write_text_file,
)
from .react import ProgrammerAgent, ReActAgent, react_run

__all__ = [
    "ServiceExecStatus",
    "ServiceResponse",
    "FINISH_TOOL",
    "FunctionCall",
    "ServiceToolkit",
    "ToolCall",
    "ToolSpec",
    "execute_tool_call",
    "parse_tool_call",
    "render_tool_call",
    "service",
    "BUILTIN_SERVICES",
    "HttpSearchEngine",
    "SearchEngine",
    "StaticSearchEngine",
    "evaluate_arithmetic",
    "get_builtin_service",
    "keyword_search_corpus",
    "read_text_file",
    "register_search_engine",
    "web_search",
    "write_text_file",
    "ProgrammerAgent",
    "ReActAgent",
    "react_run",
]
