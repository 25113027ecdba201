"""Fault-tolerant model invocation.

Two layers of resilience wrap every backend call. The transport layer
retries transient failures (network problems, simulated outages) with
exponential backoff. The parsing layer re-invokes the model when its
output cannot be parsed, and finally defers to a developer-supplied
fault handler. Budgets are checked before the first attempt, so a
blocked invocation touches the backend zero times.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Any, Callable, Sequence

from ..errors import AccessibilityError, AgentMeshError, RuleResolvableError, TransientError
from ..monitor.usage import Monitor, get_monitor
from ..msg import Msg
from .backends import ChatBackend, ModelResponse


@dataclass
class Backoff:
    """Exponential backoff schedule: initial 0.5s, doubling, capped at 8s."""

    initial: float = 0.5
    factor: float = 2.0
    cap: float = 8.0

    def delay(self, attempt_index: int) -> float:
        return min(self.initial * (self.factor**attempt_index), self.cap)


def invoke(
    backend: ChatBackend,
    messages: Sequence[Msg],
    *,
    params: dict[str, Any] | None = None,
    max_retries: int = 3,
    backoff: Backoff | None = None,
    sleep: Callable[[float], None] = time.sleep,
    monitor: Monitor | None = None,
) -> ModelResponse:
    """Invoke a chat backend with at most ``1 + max_retries`` attempts.

    The first success is returned and its token usage recorded. When all
    attempts fail transiently, an :class:`AccessibilityError` carries the
    attempt count and last cause. ``sleep`` is injectable so tests run
    without real delays.
    """
    if max_retries < 0:
        raise AgentMeshError("max_retries must be >= 0")
    mon = monitor or get_monitor()
    mon.check_budget(backend.config_name)
    schedule = backoff or Backoff()
    last: TransientError | None = None
    attempts = 0
    for attempt in range(1 + max_retries):
        attempts += 1
        try:
            resp = backend.invoke_once(messages, **(params or {}))
        except TransientError as e:
            last = e
            if attempt < max_retries:
                sleep(schedule.delay(attempt))
            continue
        mon.record_usage(
            backend.config_name,
            resp.token_usage.get("prompt", 0),
            resp.token_usage.get("completion", 0),
            backend.config.price_per_1k_tokens,
        )
        return resp
    raise AccessibilityError(
        f"backend {backend.config_name!r} failed after {attempts} attempts: {last}",
        attempts=attempts,
        cause=last,
    )


def invoke_with_parsing(
    backend: ChatBackend,
    messages: Sequence[Msg],
    parse_func: Callable[[ModelResponse], Any],
    *,
    fault_handler: Callable[[ModelResponse], Any] | None = None,
    max_retries: int = 3,
    invoke_kwargs: dict[str, Any] | None = None,
) -> Any:
    """Invoke, then parse; re-invoke on parse faults.

    ``parse_func`` maps a response to a value or raises to signal a parse
    fault. After ``max_retries`` re-invocations still fault, the last
    response goes to ``fault_handler`` if provided; otherwise the fault
    surfaces to the caller (wrapped as a rule-resolvable error when it is
    not already a runtime error class).
    """
    last_resp: ModelResponse | None = None
    last_fault: BaseException | None = None
    for _ in range(1 + max_retries):
        resp = invoke(backend, messages, **(invoke_kwargs or {}))
        last_resp = resp
        try:
            value = parse_func(resp)
        except Exception as fault:
            last_fault = fault
            continue
        resp.parsed = value
        return value
    if fault_handler is not None:
        return fault_handler(last_resp)
    if isinstance(last_fault, AgentMeshError):
        raise last_fault
    raise RuleResolvableError(
        f"response unparseable after {1 + max_retries} invocations: {last_fault}",
        text=last_resp.text if last_resp else "",
    ) from last_fault
