"""User proxy agent and its pluggable input sources.

The user agent turns human input into ``role="user"`` messages. Where
that input comes from is an attachment point: the terminal, a scripted
queue (tests), or a live studio console where a human answers input
requests over HTTP.
"""

from __future__ import annotations

import queue
import time
import uuid
from typing import Iterable

from ..errors import InputTimeoutError, TransientError
from ..msg import AnyMsg, Msg
from .base import AgentBase


class InputSource:
    def get(self, prompt: str, timeout: float | None = None) -> str:
        raise NotImplementedError


class TerminalInput(InputSource):
    """Reads from stdin. Timeouts are not enforced on a blocking terminal."""

    def get(self, prompt: str, timeout: float | None = None) -> str:
        return input(prompt)


class QueueInput(InputSource):
    """Scripted input queue for tests and batch runs."""

    def __init__(self, items: Iterable[str] = ()):
        self._queue: queue.Queue[str] = queue.Queue()
        for item in items:
            self._queue.put(item)

    def put(self, text: str) -> None:
        self._queue.put(text)

    def get(self, prompt: str, timeout: float | None = None) -> str:
        try:
            return self._queue.get(timeout=timeout)
        except queue.Empty:
            raise InputTimeoutError(f"no input arrived within {timeout}s") from None


class StudioInput(InputSource):
    """Bridges input through a running studio console.

    Posts an input request, then long-polls for the human's response; the
    calling agent blocks until the response arrives or the window closes.
    """

    POLL_MS = 500

    def __init__(self, studio_url: str, agent_name: str = "User"):
        self.studio_url = studio_url.rstrip("/")
        self.agent_name = agent_name

    def get(self, prompt: str, timeout: float | None = None) -> str:
        import requests

        request_id = uuid.uuid4().hex
        try:
            requests.post(
                f"{self.studio_url}/api/input_request",
                json={
                    "request_id": request_id,
                    "prompt": prompt,
                    "agent_name": self.agent_name,
                    "timeout": timeout,
                },
                timeout=10,
            ).raise_for_status()
        except requests.RequestException as e:
            raise TransientError(f"studio unreachable: {e}") from e
        deadline = None if timeout is None else time.monotonic() + timeout
        while True:
            remaining_ms = self.POLL_MS
            if deadline is not None:
                left = deadline - time.monotonic()
                if left <= 0:
                    raise InputTimeoutError(f"no studio input within {timeout}s")
                remaining_ms = max(1, min(self.POLL_MS, int(left * 1000)))
            try:
                resp = requests.get(
                    f"{self.studio_url}/api/input_response/{request_id}",
                    params={"wait_ms": remaining_ms},
                    timeout=(remaining_ms / 1000.0) + 10,
                )
                resp.raise_for_status()
            except requests.RequestException as e:
                raise TransientError(f"studio unreachable: {e}") from e
            body = resp.json()
            if body.get("status") == "done":
                return body.get("content", "")


class UserAgent(AgentBase):
    """The proxy of the user: replies carry whatever the human typed.

    Both the incoming message and the produced reply are recorded to
    memory, mirroring dialog agents, so transcripts stay complete. A
    timeout with no input raises; callers may convert that into an
    empty-content message if the flow should continue.
    """

    def __init__(self, name: str = "User", input_source: InputSource | None = None):
        super().__init__(name)
        self.input_source = input_source or TerminalInput()

    def reply(self, x: AnyMsg | None = None, timeout: float | None = None, **kwargs) -> Msg:
        if x is not None:
            self.observe(x)
        content = self.input_source.get(prompt=f"{self.name}: ", timeout=timeout)
        out = Msg(self.name, content, role="user")
        self.observe(out)
        return out
