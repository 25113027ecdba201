"""Workflow combinators and the message hub.

Pipelines encode recurring message-transmission patterns (sequential,
conditional, iterative) so the chain ``msg = a1(x); msg = a2(msg); ...``
collapses to one call. The message hub is a broadcast context: while
active, any participant's reply is automatically delivered to every other
current participant.
"""

from __future__ import annotations

from typing import Any, Callable, Iterable, Mapping, Sequence

from .errors import LoopGuardError, PipelineError, ValidationError
from .msg import AnyMsg, Msg, as_msg

Operand = Callable[..., AnyMsg]

DEFAULT_MAX_ITERATIONS = 1024


def _as_operand(op) -> Operand:
    # A list of operands acts as an inline sequential stage.
    if isinstance(op, (list, tuple)):
        ops = list(op)
        return lambda x=None: sequential(ops, x)
    if not callable(op):
        raise ValidationError(f"pipeline operand is not callable: {op!r}")
    return op


def sequential(operands: Sequence, x: AnyMsg | None = None) -> AnyMsg:
    """Fold ``x`` through the operands left to right.

    Equivalent to ``msg = op1(x); msg = op2(msg); ...`` - the result is
    the last operand's output. Failures are re-raised tagged with the
    failing position.
    """
    ops = list(operands)
    if not ops:
        raise ValidationError("sequential pipeline requires at least one operand")
    out = x
    for i, op in enumerate(ops):
        try:
            out = _as_operand(op)(out)
        except PipelineError:
            raise
        except Exception as e:
            raise PipelineError(
                f"operand at position {i} failed: {e}", position=i, cause=e
            ) from e
    return out


def ifelse(
    pred: Callable[[AnyMsg | None], bool],
    then_operand,
    else_operand=None,
    x: AnyMsg | None = None,
) -> AnyMsg | None:
    """Run exactly one branch chosen by ``pred(x)``.

    A missing else-branch passes ``x`` through unchanged; the non-taken
    branch is never invoked.
    """
    if pred(x):
        return _as_operand(then_operand)(x)
    if else_operand is None:
        return x
    return _as_operand(else_operand)(x)


def switch(
    selector: Callable[[AnyMsg | None], Any],
    cases: Mapping[Any, Any],
    default=None,
    x: AnyMsg | None = None,
) -> AnyMsg | None:
    """Dispatch on ``selector(x)``; exactly one branch executes."""
    key = selector(x)
    if key in cases:
        return _as_operand(cases[key])(x)
    if default is None:
        raise ValidationError(f"switch has no case for {key!r} and no default")
    return _as_operand(default)(x)


def whileloop(
    body,
    condition_func: Callable[[int, AnyMsg | None], bool],
    x: AnyMsg | None = None,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> AnyMsg | None:
    """Run ``body`` while ``condition_func(iteration, x)`` holds.

    Returns the last body output (or ``x`` when zero iterations ran). The
    iteration bound is a hard stop against model-driven non-termination.
    """
    if max_iterations < 1:
        raise ValidationError("max_iterations must be >= 1")
    op = _as_operand(body)
    i = 0
    while condition_func(i, x):
        if i >= max_iterations:
            raise LoopGuardError(f"while loop exceeded {max_iterations} iterations")
        x = op(x)
        i += 1
    return x


def forloop(body, n: int, x: AnyMsg | None = None) -> AnyMsg | None:
    """Run ``body`` exactly ``n`` times; ``n == 0`` returns ``x`` unchanged."""
    if n < 0:
        raise ValidationError("forloop count must be >= 0")
    op = _as_operand(body)
    for _ in range(n):
        x = op(x)
    return x


class SequentialPipeline:
    def __init__(self, operands: Sequence):
        if not list(operands):
            raise ValidationError("sequential pipeline requires at least one operand")
        self.operands = list(operands)

    def __call__(self, x: AnyMsg | None = None) -> AnyMsg:
        return sequential(self.operands, x)


class IfElsePipeline:
    def __init__(self, pred, then_operand, else_operand=None):
        self.pred = pred
        self.then_operand = then_operand
        self.else_operand = else_operand

    def __call__(self, x: AnyMsg | None = None):
        return ifelse(self.pred, self.then_operand, self.else_operand, x)


class SwitchPipeline:
    def __init__(self, selector, cases: Mapping, default=None):
        self.selector = selector
        self.cases = dict(cases)
        self.default = default

    def __call__(self, x: AnyMsg | None = None):
        return switch(self.selector, self.cases, self.default, x)


class WhileLoopPipeline:
    def __init__(self, body, condition_func, max_iterations: int = DEFAULT_MAX_ITERATIONS):
        self.body = body
        self.condition_func = condition_func
        self.max_iterations = max_iterations

    def __call__(self, x: AnyMsg | None = None):
        return whileloop(self.body, self.condition_func, x, self.max_iterations)


class ForLoopPipeline:
    def __init__(self, body, n: int):
        self.body = body
        self.n = n

    def __call__(self, x: AnyMsg | None = None):
        return forloop(self.body, self.n, x)


class MsgHub:
    """Broadcast context for a group of agents.

    On entry the announcement (if any) is observed by all participants.
    While the hub is active, a participant's reply is delivered to every
    *other* current participant; the speaker keeps only its own memory
    entry. ``add``/``delete`` change membership immediately: removed
    agents stop receiving, added ones start. ``broadcast`` pushes an
    external message to all current participants.

    One hub instance is not concurrently reentrant; speak turns are taken
    one at a time.
    """

    def __init__(self, participants: Sequence, announcement: AnyMsg | Sequence[AnyMsg] | None = None):
        names = [a.name for a in participants]
        if len(set(names)) != len(names):
            raise ValidationError(f"hub participants must be unique, got {names}")
        self.participants = list(participants)
        self.announcement = announcement

    def __enter__(self) -> "MsgHub":
        for agent in self.participants:
            agent._hub = self
        if self.announcement is not None:
            self.broadcast(self.announcement)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        # No teardown broadcast; participants simply stop being wired up.
        for agent in self.participants:
            agent._hub = None

    def add(self, agent_or_agents) -> None:
        agents = agent_or_agents if isinstance(agent_or_agents, (list, tuple)) else [agent_or_agents]
        for agent in agents:
            if any(a.name == agent.name for a in self.participants):
                continue
            self.participants.append(agent)
            agent._hub = self

    def delete(self, agent_or_agents) -> None:
        agents = agent_or_agents if isinstance(agent_or_agents, (list, tuple)) else [agent_or_agents]
        for agent in agents:
            self.participants = [a for a in self.participants if a.name != agent.name]
            agent._hub = None

    def broadcast(self, msg: AnyMsg | Sequence[AnyMsg]) -> None:
        msgs = msg if isinstance(msg, (list, tuple)) else [msg]
        for m in msgs:
            resolved = as_msg(m)
            for agent in list(self.participants):
                agent.observe(resolved)

    def speak(self, agent, x: AnyMsg | None = None, **kwargs) -> AnyMsg:
        """Let ``agent`` take a turn; its reply reaches the other participants."""
        if not any(a.name == agent.name for a in self.participants):
            raise ValidationError(f"agent {agent.name!r} is not a participant of this hub")
        return agent(x, **kwargs)

    def _deliver(self, speaker, msg: AnyMsg) -> None:
        # Delivery order is the participants' insertion order, which keeps
        # transcripts deterministic.
        for agent in list(self.participants):
            if agent is speaker or agent.name == speaker.name:
                continue
            agent.observe(msg)


def msghub(
    participants: Sequence,
    announcement: AnyMsg | Sequence[AnyMsg] | None = None,
) -> MsgHub:
    """Create a :class:`MsgHub`; use as a context manager."""
    return MsgHub(participants, announcement)
