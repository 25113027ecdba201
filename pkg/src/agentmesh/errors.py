"""Exception hierarchy for the runtime.

Errors are classified by how they can be handled: transient transport
failures (retryable), malformed-but-repairable model output, structural
validation problems, and hard runtime faults. The distributed layer
transports errors by class name, so every class here must be
constructible from a single message string.
"""

from __future__ import annotations


class AgentMeshError(Exception):
    """Base class for all runtime errors."""


class ValidationError(AgentMeshError):
    """A precondition or schema constraint was violated."""


class DeserializationError(ValidationError):
    """Wire payload is missing a required field or has a malformed one."""


class TransientError(AgentMeshError):
    """A single failed attempt against a backend; retryable."""


class AccessibilityError(AgentMeshError):
    """A backend stayed unreachable after all retry attempts.

    Carries the attempt count and the last underlying cause.
    """

    def __init__(self, message: str, *, attempts: int = 0, cause: BaseException | None = None):
        super().__init__(message)
        self.attempts = attempts
        self.cause = cause


class ParseError(AgentMeshError):
    """Structured content could not be extracted from text."""


class RuleResolvableError(ParseError):
    """Malformed model output of the format-error class that deterministic
    repair rules target; raised when the rules could not produce a parse.

    ``text`` holds the post-repair candidate for diagnostics.
    """

    def __init__(self, message: str, *, text: str = ""):
        super().__init__(message)
        self.text = text


class StructuredResponseError(ParseError):
    """A structured model reply was parsed but required keys are absent."""

    def __init__(self, message: str, *, missing_keys: list[str] | None = None):
        super().__init__(message)
        self.missing_keys = list(missing_keys or [])


class ToolCallFault(AgentMeshError):
    """A correctable tool-call problem (bad format, unknown tool, bad args).

    Never escapes the reasoning loop: it is converted into a diagnostic
    the model sees on its next turn.
    """

    def __init__(self, diagnostic: str):
        super().__init__(diagnostic)
        self.diagnostic = diagnostic


class AgentError(AgentMeshError):
    """An agent failed to produce a reply; wraps the underlying cause."""

    def __init__(self, message: str, *, agent_name: str = "", cause: BaseException | None = None):
        super().__init__(message)
        self.agent_name = agent_name
        self.cause = cause


class InputTimeoutError(AgentMeshError):
    """No user input arrived within the allowed window."""


class ResolutionTimeoutError(AgentMeshError):
    """A deferred message did not resolve within the allowed window."""


class BudgetExceededError(AgentMeshError):
    """A registered budget blocks further backend invocations."""


class LoopGuardError(AgentMeshError):
    """A loop pipeline hit its iteration bound without terminating."""


class PipelineError(AgentMeshError):
    """An operand inside a pipeline failed; records its position."""

    def __init__(self, message: str, *, position: int = -1, cause: BaseException | None = None):
        super().__init__(message)
        self.position = position
        self.cause = cause


class GraphValidationError(ValidationError):
    """A workflow graph failed static checks.

    ``problems`` lists every violation found, not just the first.
    """

    def __init__(self, problems: list[str]):
        super().__init__("invalid workflow graph:\n" + "\n".join(f"- {p}" for p in problems))
        self.problems = list(problems)


class CompileError(AgentMeshError):
    """A workflow node payload cannot be translated to source code."""

    def __init__(self, message: str, *, node_id: str = ""):
        super().__init__(message)
        self.node_id = node_id


class NodeExecutionError(AgentMeshError):
    """A workflow node failed during direct execution."""

    def __init__(self, message: str, *, node_id: str = "", cause: BaseException | None = None):
        super().__init__(message)
        self.node_id = node_id
        self.cause = cause


class ReactIncompleteError(AgentMeshError):
    """The reasoning-acting loop exhausted its iterations without a finish."""

    def __init__(self, message: str, *, trace: list | None = None):
        super().__init__(message)
        self.trace = list(trace or [])


_WIRE_CLASSES = None


def error_from_wire(type_name: str, message: str) -> AgentMeshError:
    """Reconstruct a transported error, preserving its classification.

    Unknown type names degrade to :class:`AgentError` so a newer server
    never crashes an older client.
    """
    global _WIRE_CLASSES
    if _WIRE_CLASSES is None:
        _WIRE_CLASSES = {
            cls.__name__: cls
            for cls in list(globals().values())
            if isinstance(cls, type) and issubclass(cls, AgentMeshError)
        }
    cls = _WIRE_CLASSES.get(type_name)
    if cls is None:
        return AgentError(f"{type_name}: {message}")
    try:
        return cls(message)
    except TypeError:
        return AgentError(f"{type_name}: {message}")
