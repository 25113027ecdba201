"""Client side of the distributed mode.

``to_dist`` turns a local agent (or its config) into a drop-in remote
proxy: ``reply`` enqueues the call on the agent server and returns a
placeholder immediately, so the caller keeps scheduling work while the
model computes. ``resolve`` blocks on a placeholder's coordinates via
long-poll and caches the result. Placeholder inputs are forwarded as
coordinates, never resolved on the sender's behalf: the receiving server
fetches the value itself once it is ready to compute.
"""

from __future__ import annotations

import json
import subprocess
import sys
import tempfile
import time
from pathlib import Path
from typing import Any

import requests
from loguru import logger

from ..errors import (
    AccessibilityError,
    ResolutionTimeoutError,
    TransientError,
    ValidationError,
    error_from_wire,
)
from ..models.invoke import Backoff
from ..msg import AnyMsg, Msg, PlaceholderMsg, deserialize_msg

DEFAULT_RESOLVE_TIMEOUT = 60.0
POLL_WAIT_MS = 1_000


def _request(method: str, url: str, payload: dict | None = None, timeout: float = 15.0):
    try:
        resp = requests.request(method, url, json=payload, timeout=timeout)
    except requests.RequestException as e:
        raise TransientError(f"{method} {url} failed: {e}") from e
    if resp.status_code >= 500:
        raise TransientError(f"{method} {url} returned {resp.status_code}")
    return resp


def _request_with_retry(
    method: str,
    url: str,
    payload: dict | None = None,
    max_retries: int = 3,
    sleep=time.sleep,
):
    schedule = Backoff(initial=0.1, factor=2.0, cap=2.0)
    last: TransientError | None = None
    for attempt in range(1 + max_retries):
        try:
            return _request(method, url, payload)
        except TransientError as e:
            last = e
            if attempt < max_retries:
                sleep(schedule.delay(attempt))
    raise AccessibilityError(
        f"server unreachable after {1 + max_retries} attempts: {last}",
        attempts=1 + max_retries,
        cause=last,
    )


def resolve(
    p: PlaceholderMsg,
    timeout: float = DEFAULT_RESOLVE_TIMEOUT,
    poll_wait_ms: int = POLL_WAIT_MS,
) -> Msg:
    """Block until the placeholder's task completes; cache and return it.

    Resolution is idempotent: after the first fetch the cached message is
    returned without touching the network. A server-side agent failure
    surfaces here, reconstructed with its original error class.
    """
    with p._lock:
        if p.resolved is not None:
            return p.resolved
        deadline = time.monotonic() + timeout
        url = f"http://{p.host}:{p.port}/tasks/{p.task_id}"
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise ResolutionTimeoutError(
                    f"task {p.task_id} on {p.host}:{p.port} unresolved after {timeout}s"
                )
            wait_ms = max(1, min(poll_wait_ms, int(remaining * 1000)))
            resp = _request_with_retry("GET", f"{url}?wait_ms={wait_ms}")
            body = resp.json()
            status = body.get("status")
            if status == "done":
                msg = deserialize_msg(body["msg"])
                if not isinstance(msg, Msg):
                    raise ValidationError("server returned a placeholder for a finished task")
                p.resolved = msg
                return msg
            if status == "error":
                err = body.get("error", {})
                raise error_from_wire(err.get("type", "AgentError"), err.get("message", ""))
            # pending: poll again until the deadline


class RemoteAgentProxy:
    """Drop-in stand-in for an agent living on an agent server.

    ``reply`` never blocks on model latency: it returns a placeholder as
    soon as the server acknowledges the enqueue. ``observe`` forwards the
    message into the remote agent's mailbox.
    """

    def __init__(self, name: str, host: str, port: int, agent_id: str, server_handle=None):
        self.name = name
        self.host = host
        self.port = int(port)
        self.agent_id = agent_id
        self._server_handle = server_handle
        self._hub = None

    @property
    def _base(self) -> str:
        return f"http://{self.host}:{self.port}"

    def reply(self, x: AnyMsg | None = None, **kwargs) -> PlaceholderMsg:
        body: dict[str, Any] = {"msg": x.to_dict() if x is not None else None}
        if kwargs:
            body["kwargs"] = kwargs
        resp = _request_with_retry("POST", f"{self._base}/agents/{self.agent_id}/call", body)
        if resp.status_code != 202:
            raise AccessibilityError(
                f"call rejected by {self.host}:{self.port}: {resp.status_code} {resp.text[:200]}",
                attempts=1,
            )
        return PlaceholderMsg(resp.json()["task_id"], self.host, self.port)

    def __call__(self, x: AnyMsg | None = None, **kwargs) -> PlaceholderMsg:
        out = self.reply(x, **kwargs)
        hub = self._hub
        if hub is not None:
            hub._deliver(self, out)
        return out

    def observe(self, x: AnyMsg) -> None:
        body = {"msg": x.to_dict()}
        resp = _request_with_retry("POST", f"{self._base}/agents/{self.agent_id}/observe", body)
        if resp.status_code not in (200, 204):
            raise AccessibilityError(
                f"observe rejected by {self.host}:{self.port}: {resp.status_code}",
                attempts=1,
            )

    def close(self) -> None:
        if self._server_handle is not None:
            self._server_handle.stop()
            self._server_handle = None

    def __repr__(self):
        return f"RemoteAgentProxy(name={self.name!r}, {self.host}:{self.port})"


class LaunchedServer:
    """An agent server running as a local subprocess."""

    def __init__(self, proc: subprocess.Popen, host: str, port: int):
        self.proc = proc
        self.host = host
        self.port = int(port)

    def stop(self) -> None:
        try:
            requests.post(f"http://{self.host}:{self.port}/shutdown", timeout=2)
        except requests.RequestException:
            pass
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self.proc.terminate()
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()

    def __enter__(self) -> "LaunchedServer":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.stop()


def _free_port() -> int:
    import socket

    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def wait_healthy(host: str, port: int, timeout: float = 15.0) -> None:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        try:
            resp = requests.get(f"http://{host}:{port}/health", timeout=1)
            if resp.status_code == 200:
                return
        except requests.RequestException:
            pass
        time.sleep(0.05)
    raise AccessibilityError(f"server {host}:{port} not healthy within {timeout}s", attempts=1)


def launch_local_server(
    port: int | None = None,
    model_configs: str | Path | list | None = None,
    host: str = "127.0.0.1",
) -> LaunchedServer:
    """Spawn an agent server subprocess on a free port and wait for health."""
    port = port or _free_port()
    cmd = [sys.executable, "-m", "agentmesh.cli", "server", "--host", host, "--port", str(port)]
    if model_configs is not None:
        if isinstance(model_configs, (str, Path)):
            cmd += ["--models", str(model_configs)]
        else:
            tmp = tempfile.NamedTemporaryFile(
                "w", suffix=".json", prefix="agentmesh-models-", delete=False
            )
            json.dump(model_configs, tmp)
            tmp.close()
            cmd += ["--models", tmp.name]
    proc = subprocess.Popen(cmd, stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    try:
        wait_healthy(host, port)
    except AccessibilityError:
        proc.terminate()
        raise
    return LaunchedServer(proc, host, port)


def to_dist(
    agent_or_config,
    host: str = "127.0.0.1",
    port: int | None = None,
    launch_server: bool = False,
    model_configs: str | Path | list | None = None,
) -> RemoteAgentProxy:
    """Convert an agent (or an agent config) to distributed mode.

    The remote instance is created on the server from the agent's class
    and constructor arguments; the returned proxy has the same call
    surface as the local agent. With ``launch_server`` a subprocess
    server is started on a free port and cleaned up via ``proxy.close()``.
    """
    from ..agents.base import AgentBase
    from ..agents.config import AgentConfig

    handle = None
    if launch_server:
        handle = launch_local_server(port, model_configs=model_configs, host=host)
        host, port = handle.host, handle.port
    if port is None:
        raise ValidationError("to_dist requires a port (or launch_server=True)")

    if isinstance(agent_or_config, AgentBase):
        class_name = type(agent_or_config).__name__
        kwargs = agent_or_config.init_kwargs()
        name = agent_or_config.name
    elif isinstance(agent_or_config, AgentConfig):
        class_name = agent_or_config.agent_class
        kwargs = dict(agent_or_config.args)
        name = kwargs.get("name", class_name)
    else:
        raise ValidationError(f"cannot convert {type(agent_or_config).__name__} to distributed mode")

    resp = _request_with_retry(
        "POST", f"http://{host}:{port}/agents", {"agent_class": class_name, "agent_kwargs": kwargs}
    )
    if resp.status_code != 201:
        body = resp.json() if resp.headers.get("Content-Type", "").startswith("application/json") else {}
        err = body.get("error", {})
        raise ValidationError(
            f"server refused to create agent {class_name!r}: {err.get('message', resp.status_code)}"
        )
    return RemoteAgentProxy(name, host, port, resp.json()["agent_id"], server_handle=handle)


def emit_to_studio(studio_url: str | None, m: AnyMsg, source: str | None = None) -> None:
    """Fire-and-forget forward of a message to a studio console.

    Delivery failures are logged and never disturb the workflow.
    """
    if not studio_url:
        return
    if isinstance(m, PlaceholderMsg) and m.resolved is None:
        # Never block a workflow just to display a message.
        return
    emit_to_studio_dict(studio_url, (m.resolved if isinstance(m, PlaceholderMsg) else m).to_dict(), source)


def emit_to_studio_dict(studio_url: str | None, msg_dict: dict, source: str | None = None) -> None:
    if not studio_url:
        return
    try:
        requests.post(
            studio_url.rstrip("/") + "/api/messages",
            json={"msg": msg_dict, "source": source},
            timeout=2,
        )
    except requests.RequestException as e:
        logger.debug("studio emit failed (ignored): {}", e)


def register_with_studio(studio_url: str, host: str, port: int) -> str | None:
    """Announce an agent server to the studio's server panel."""
    try:
        resp = requests.post(
            studio_url.rstrip("/") + "/api/servers", json={"host": host, "port": port}, timeout=5
        )
        resp.raise_for_status()
        return resp.json().get("id")
    except requests.RequestException as e:
        logger.warning("studio registration failed (ignored): {}", e)
        return None
