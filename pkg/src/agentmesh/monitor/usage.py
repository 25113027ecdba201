"""Model/API usage metering and budget enforcement.

Every successful model invocation is recorded per config name: call count,
prompt/completion tokens, and cost derived from the config's per-1K-token
price. Budgets watch one metric (calls, tokens, or cost) and either warn
when usage approaches the threshold or block invocations once it would be
exceeded. All state is guarded by one lock so agents on any thread can
record concurrently.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from ..errors import BudgetExceededError, ValidationError

METRICS = ("calls", "tokens", "cost")
ACTIONS = ("warn", "block")

# "Approached" means 80% of the threshold; the warning is edge-triggered
# (fires exactly once per budget when the boundary is first crossed).
APPROACH_FACTOR = 0.8


@dataclass
class UsageRecord:
    """Accumulated usage for one model config. Counters never decrease."""

    config_name: str
    calls: int = 0
    prompt_tokens: int = 0
    completion_tokens: int = 0
    cost: float = 0.0

    @property
    def total_tokens(self) -> int:
        return self.prompt_tokens + self.completion_tokens


@dataclass
class Budget:
    """A threshold on one usage metric.

    ``action="warn"`` emits events at the 80% crossing and again when the
    threshold itself is exceeded; ``action="block"`` additionally raises so
    the blocked invocation performs zero backend attempts. ``config_name``
    of None applies the budget to aggregate usage across all configs.
    """

    metric: str
    threshold: float
    action: str = "warn"
    config_name: str | None = None
    _approach_fired: bool = field(default=False, repr=False)
    _exceed_fired: bool = field(default=False, repr=False)

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValidationError(f"unknown budget metric {self.metric!r}; expected one of {METRICS}")
        if self.action not in ACTIONS:
            raise ValidationError(f"unknown budget action {self.action!r}; expected one of {ACTIONS}")
        if self.threshold <= 0:
            raise ValidationError("budget threshold must be positive")


class Monitor:
    """Thread-safe registry of usage records and budgets."""

    def __init__(self):
        self._lock = threading.Lock()
        self._records: dict[str, UsageRecord] = {}
        self._budgets: list[Budget] = []
        #: (budget, kind, value) tuples; kind is "approach" or "exceed".
        self.events: list[tuple[Budget, str, float]] = []

    def record_usage(
        self,
        config_name: str,
        prompt_tokens: int,
        completion_tokens: int,
        price_per_1k_tokens: float | None = None,
    ) -> UsageRecord:
        with self._lock:
            rec = self._records.setdefault(config_name, UsageRecord(config_name))
            rec.calls += 1
            rec.prompt_tokens += prompt_tokens
            rec.completion_tokens += completion_tokens
            if price_per_1k_tokens:
                rec.cost += (prompt_tokens + completion_tokens) / 1000.0 * price_per_1k_tokens
            return rec

    def get_usage(self, config_name: str) -> UsageRecord:
        """Return the record for ``config_name``; zeroed if never seen."""
        with self._lock:
            rec = self._records.get(config_name)
            if rec is None:
                return UsageRecord(config_name)
            return UsageRecord(
                config_name=rec.config_name,
                calls=rec.calls,
                prompt_tokens=rec.prompt_tokens,
                completion_tokens=rec.completion_tokens,
                cost=rec.cost,
            )

    def add_budget(self, budget: Budget) -> Budget:
        with self._lock:
            self._budgets.append(budget)
            return budget

    def _metric_value(self, budget: Budget, projected_calls: int) -> float:
        if budget.config_name is None:
            records = list(self._records.values())
        else:
            records = [r for r in (self._records.get(budget.config_name),) if r is not None]
        if budget.metric == "calls":
            # Calls can be projected: the check runs before the attempt.
            return sum(r.calls for r in records) + projected_calls
        if budget.metric == "tokens":
            return float(sum(r.total_tokens for r in records))
        return sum(r.cost for r in records)

    def check_budget(self, config_name: str | None = None) -> None:
        """Gate one upcoming invocation against all applicable budgets.

        Raises :class:`BudgetExceededError` before any backend attempt when
        a block-action budget would be exceeded. Token/cost metrics are
        judged on recorded totals (the size of the upcoming call is
        unknowable in advance), so they block the first call after the
        crossing.
        """
        with self._lock:
            for budget in self._budgets:
                if budget.config_name is not None and budget.config_name != config_name:
                    continue
                value = self._metric_value(budget, projected_calls=1)
                if value >= APPROACH_FACTOR * budget.threshold and not budget._approach_fired:
                    budget._approach_fired = True
                    self.events.append((budget, "approach", value))
                if value > budget.threshold:
                    if not budget._exceed_fired:
                        budget._exceed_fired = True
                        self.events.append((budget, "exceed", value))
                    if budget.action == "block":
                        raise BudgetExceededError(
                            f"budget exceeded: {budget.metric} {value:g} > {budget.threshold:g}"
                            + (f" for config {budget.config_name!r}" if budget.config_name else "")
                        )

    def warn_events(self) -> list[tuple[Budget, str, float]]:
        with self._lock:
            return [e for e in self.events if e[1] == "approach"]

    def reset(self) -> None:
        with self._lock:
            self._records.clear()
            self._budgets.clear()
            self.events.clear()


_monitor = Monitor()


def get_monitor() -> Monitor:
    """The process-wide monitor used by the model layer."""
    return _monitor


def reset_monitor() -> None:
    _monitor.reset()
