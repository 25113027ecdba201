"""The status + payload envelope returned by every service function."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any

from ..errors import ValidationError


class ServiceExecStatus(Enum):
    SUCCESS = "SUCCESS"
    ERROR = "ERROR"


@dataclass
class ServiceResponse:
    """Result of one service function execution.

    ``content`` holds the result on success and a non-empty diagnostic on
    error.
    """

    status: ServiceExecStatus
    content: Any

    def __post_init__(self):
        if self.status is ServiceExecStatus.ERROR and not self.content:
            raise ValidationError("error responses must carry a diagnostic")

    @property
    def ok(self) -> bool:
        return self.status is ServiceExecStatus.SUCCESS

    def render(self) -> str:
        return f"[{self.status.value}] {self.content}"
