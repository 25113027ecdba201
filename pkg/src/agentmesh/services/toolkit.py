"""Service toolkit: from plain functions to model-usable tools.

Four responsibilities live here. Function preparation: bind
developer-preset arguments and expose only the model-fillable parameters
in a JSON-schema description. Instruction preparation: render
deterministic tool listings and the calling-format text. Call parsing:
extract and validate a tool call from model output, turning every
problem into a correctable diagnostic. Execution: run the named
functions, converting their exceptions into error envelopes instead of
letting them escape.
"""

from __future__ import annotations

import inspect
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from ..errors import ParseError, ToolCallFault, ValidationError
from ..models.parsing import parse_json_block
from ..msg import canonical_json
from .response import ServiceExecStatus, ServiceResponse

#: Reserved tool name that ends a reasoning-acting loop; its single
#: argument carries the final answer.
FINISH_TOOL = "finish"


@dataclass
class ServiceMeta:
    description: str
    params: dict[str, dict[str, str]]


def service(description: str, params: dict[str, dict[str, str]] | None = None):
    """Declare a function as a service: attach its registration metadata.

    ``params`` maps each parameter name to its JSON-schema fragment
    (``type`` and ``description``). Every parameter a model may fill must
    be declared; developer-preset parameters may be omitted here and bound
    at registration time instead.
    """

    def wrap(fn: Callable) -> Callable:
        fn._service_meta = ServiceMeta(description=description, params=dict(params or {}))
        return fn

    return wrap


@dataclass
class ToolSpec:
    """A ready-to-use tool: bound presets plus the model-facing schema."""

    name: str
    description: str
    parameters: dict[str, Any]
    preset: dict[str, Any]
    fn: Callable

    def json_schema(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "description": self.description,
            "parameters": self.parameters,
        }


@dataclass
class FunctionCall:
    name: str
    arguments: dict[str, Any] = field(default_factory=dict)


@dataclass
class ToolCall:
    """Structured acting step: reasoning, visible speech, and calls."""

    thought: str
    speak: str
    function: list[FunctionCall] = field(default_factory=list)


def render_tool_call(call: ToolCall) -> str:
    """Render a call exactly as the calling format instructs models to."""
    payload = {
        "thought": call.thought,
        "speak": call.speak,
        "function": [{"name": fc.name, "arguments": fc.arguments} for fc in call.function],
    }
    return "```json\n" + canonical_json(payload) + "\n```"


class ServiceToolkit:
    """Registry of prepared tools for one agent or application."""

    def __init__(self):
        self.tools: dict[str, ToolSpec] = {}

    def add(self, fn: Callable, **preset: Any) -> ToolSpec:
        """Register ``fn`` with developer-preset arguments bound.

        The remaining parameters become the model-fillable schema. Preset
        names must exist in the function signature, and together with the
        declared parameters they must cover it exactly.
        """
        meta: ServiceMeta | None = getattr(fn, "_service_meta", None)
        if meta is None:
            raise ValidationError(
                f"{fn.__name__} is not a registered service function; decorate it with @service"
            )
        sig_params = [
            p.name
            for p in inspect.signature(fn).parameters.values()
            if p.kind in (p.POSITIONAL_OR_KEYWORD, p.KEYWORD_ONLY)
        ]
        unknown_presets = set(preset) - set(sig_params)
        if unknown_presets:
            raise ValidationError(
                f"preset argument(s) not in {fn.__name__} signature: {sorted(unknown_presets)}"
            )
        exposed = {name: spec for name, spec in meta.params.items() if name not in preset}
        covered = set(exposed) | set(preset)
        missing = set(sig_params) - covered
        if missing:
            raise ValidationError(
                f"{fn.__name__} parameters neither declared nor preset: {sorted(missing)}"
            )
        name = fn.__name__
        if name in self.tools:
            raise ValidationError(f"tool already registered: {name!r}")
        spec = ToolSpec(
            name=name,
            description=meta.description,
            parameters={
                "type": "object",
                "properties": exposed,
                "required": sorted(exposed),
            },
            preset=dict(preset),
            fn=fn,
        )
        self.tools[name] = spec
        return spec

    # -- instruction preparation ------------------------------------------

    def tools_instruction(self) -> str:
        """Deterministic natural-language listing of every tool."""
        if not self.tools:
            raise ValidationError("toolkit is empty; nothing to describe")
        lines = ["The following tools are available:", ""]
        for i, spec in enumerate(self.tools.values(), start=1):
            lines.append(f"{i}. {spec.name}: {spec.description}")
            props = spec.parameters["properties"]
            if props:
                lines.append("   Parameters:")
                for pname in sorted(props):
                    p = props[pname]
                    lines.append(f"   - {pname} ({p.get('type', 'string')}): {p.get('description', '')}")
            else:
                lines.append("   Parameters: none")
        return "\n".join(lines)

    @staticmethod
    def calling_format_instruction() -> str:
        return (
            "Respond with exactly one JSON object inside a Markdown fenced code block, "
            "with these fields:\n"
            "```json\n"
            '{"thought": "your reasoning", "speak": "what you say to the user", '
            '"function": [{"name": "tool_name", "arguments": {"param": "value"}}]}\n'
            "```\n"
            'When the task is complete, call the reserved tool "finish" with a single '
            'argument "response" holding your final answer.'
        )

    # -- call parsing -------------------------------------------------------

    def parse(self, response_text: str) -> ToolCall:
        """Validate model output against the calling format.

        Raises :class:`ToolCallFault` with a correctable diagnostic for
        every problem class: bad JSON, missing fields, unknown tools, and
        missing or unknown arguments.
        """
        try:
            data = parse_json_block(response_text)
        except ParseError as e:
            raise ToolCallFault(f"response parsing error: {e}") from e
        missing = [k for k in ("thought", "speak", "function") if k not in data]
        if missing:
            raise ToolCallFault("missing field: " + ", ".join(missing))
        raw_calls = data["function"]
        if not isinstance(raw_calls, list):
            raise ToolCallFault('field "function" must be an array of calls')
        calls: list[FunctionCall] = []
        for entry in raw_calls:
            if not isinstance(entry, dict) or "name" not in entry:
                raise ToolCallFault('each function entry must be an object with a "name"')
            name = entry["name"]
            arguments = entry.get("arguments", {})
            if not isinstance(arguments, dict):
                raise ToolCallFault(f'arguments of {name!r} must be an object')
            if name == FINISH_TOOL:
                if "response" not in arguments:
                    raise ToolCallFault('finish requires a "response" argument')
                calls.append(FunctionCall(name, arguments))
                continue
            spec = self.tools.get(name)
            if spec is None:
                raise ToolCallFault(
                    f"unknown tool {name!r}; valid tools: {sorted(self.tools)}"
                )
            required = set(spec.parameters["properties"])
            missing_args = sorted(required - set(arguments))
            if missing_args:
                raise ToolCallFault(f"call to {name!r} missing argument(s): {missing_args}")
            extra_args = sorted(set(arguments) - required)
            if extra_args:
                raise ToolCallFault(f"call to {name!r} has unknown argument(s): {extra_args}")
            calls.append(FunctionCall(name, dict(arguments)))
        return ToolCall(thought=str(data["thought"]), speak=str(data["speak"]), function=calls)

    # -- execution ------------------------------------------------------------

    def execute_one(self, fc: FunctionCall) -> ServiceResponse:
        """Run one validated call; tool exceptions become error envelopes."""
        spec = self.tools.get(fc.name)
        if spec is None:
            # Executing an unvalidated call is a toolkit bug, not a model error.
            raise RuntimeError(f"execute of unregistered tool {fc.name!r}")
        kwargs = {**spec.preset, **fc.arguments}
        try:
            result = spec.fn(**kwargs)
        except Exception as e:
            return ServiceResponse(
                ServiceExecStatus.ERROR, f"{type(e).__name__} while executing {fc.name}: {e}"
            )
        if isinstance(result, ServiceResponse):
            return result
        return ServiceResponse(ServiceExecStatus.SUCCESS, result)

    def execute(self, call: ToolCall) -> list[ServiceResponse]:
        """Run every function named by ``call``, in order."""
        return [self.execute_one(fc) for fc in call.function if fc.name != FINISH_TOOL]


def parse_tool_call(toolkit: ServiceToolkit, response_text: str) -> ToolCall:
    return toolkit.parse(response_text)


def execute_tool_call(toolkit: ServiceToolkit, call: ToolCall) -> list[ServiceResponse]:
    return toolkit.execute(call)
