"""Agent server: hosts agents behind an HTTP interface.

Each hosted agent gets a mailbox (a queue drained by one worker thread),
so its calls execute strictly one at a time in arrival order while
different agents run fully concurrently - actor semantics. A call is
acknowledged immediately with a task id; callers fetch the result later
via long-poll. Message inputs may be placeholders: the worker resolves
them against their origin server before computing, so values flow
peer-to-peer without bouncing through the client.
"""

from __future__ import annotations

import json
import queue
import re
import threading
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any

from loguru import logger

from ..agents.base import AGENT_CLASSES, get_agent_class
from ..errors import ValidationError
from ..msg import Msg, PlaceholderMsg, as_msg, deserialize_msg

_AGENT_PATH = re.compile(r"^/agents/([0-9a-f]+)/(call|observe)$")
_TASK_PATH = re.compile(r"^/tasks/([0-9a-f-]+)$")

MAX_WAIT_MS = 30_000


class _Task:
    __slots__ = ("event", "msg", "error")

    def __init__(self):
        self.event = threading.Event()
        self.msg: Msg | None = None
        self.error: tuple[str, str] | None = None

    def complete(self, msg: Msg) -> None:
        self.msg = msg
        self.event.set()

    def fail(self, error: BaseException | str) -> None:
        if isinstance(error, str):
            self.error = ("AgentError", error)
        else:
            self.error = (type(error).__name__, str(error))
        self.event.set()


class _AgentWorker:
    """Mailbox plus the single thread that drains it."""

    def __init__(self, agent, server: "AgentServer"):
        self.agent = agent
        self.server = server
        self.mailbox: queue.Queue = queue.Queue()
        self.thread = threading.Thread(
            target=self._run, name=f"agent-{agent.name}", daemon=True
        )
        self.thread.start()

    def _run(self) -> None:
        while True:
            job = self.mailbox.get()
            if job is None:
                return
            kind, payload = job
            if kind == "observe":
                try:
                    self.agent.observe(as_msg(payload))
                except Exception as e:  # keep the mailbox alive
                    logger.warning("observe failed on {}: {}", self.agent.name, e)
                continue
            task, x, kwargs = payload
            try:
                resolved = as_msg(x) if x is not None else None
                out = self.agent(resolved, **kwargs)
                task.complete(as_msg(out))
            except Exception as e:
                task.fail(e)
            else:
                self.server._emit(task.msg)

    def enqueue_call(self, task: _Task, x, kwargs: dict[str, Any]) -> None:
        self.mailbox.put(("call", (task, x, kwargs)))

    def enqueue_observe(self, x) -> None:
        self.mailbox.put(("observe", x))

    def drain(self, grace: float) -> None:
        self.mailbox.put(None)
        self.thread.join(timeout=grace)


class AgentServer:
    """HTTP server that instantiates agents on request and runs their calls.

    ``allowed_agent_classes`` restricts which registered classes clients
    may instantiate (None allows all). When ``studio_url`` is set, every
    reply produced here is forwarded to the studio, tagged with its source
    agent and this server's address.
    """

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 0,
        allowed_agent_classes: list[str] | None = None,
        studio_url: str | None = None,
        grace: float = 5.0,
    ):
        self.host = host
        self.requested_port = port
        self.allowed = list(allowed_agent_classes) if allowed_agent_classes is not None else None
        self.studio_url = studio_url.rstrip("/") if studio_url else None
        self.grace = grace
        self.workers: dict[str, _AgentWorker] = {}
        self.tasks: dict[str, _Task] = {}
        self._lock = threading.Lock()
        self._httpd: ThreadingHTTPServer | None = None
        self._serve_thread: threading.Thread | None = None
        self._closing = False

    # -- lifecycle ----------------------------------------------------------

    def start(self) -> "AgentServer":
        server = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, fmt, *args):  # quiet by default
                pass

            def _send(self, code: int, body: dict | None = None) -> None:
                data = json.dumps(body).encode("utf-8") if body is not None else b""
                self.send_response(code)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                if data:
                    self.wfile.write(data)

            def _body(self) -> dict:
                length = int(self.headers.get("Content-Length") or 0)
                raw = self.rfile.read(length) if length else b"{}"
                return json.loads(raw or b"{}")

            def do_GET(self):
                try:
                    server._handle_get(self)
                except Exception as e:
                    self._send(500, {"error": {"type": type(e).__name__, "message": str(e)}})

            def do_POST(self):
                try:
                    server._handle_post(self)
                except Exception as e:
                    self._send(500, {"error": {"type": type(e).__name__, "message": str(e)}})

        # OSError (port in use) propagates: binding failures are startup
        # problems for the caller, not validation problems.
        self._httpd = ThreadingHTTPServer((self.host, self.requested_port), Handler)
        self._httpd.daemon_threads = True
        self._serve_thread = threading.Thread(
            target=self._httpd.serve_forever, name="agent-server", daemon=True
        )
        self._serve_thread.start()
        return self

    @property
    def port(self) -> int:
        if self._httpd is None:
            return self.requested_port
        return self._httpd.server_address[1]

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def stop(self, grace: float | None = None) -> None:
        """Stop serving; drain in-flight tasks up to the grace period.

        Tasks that cannot finish in time are failed as aborted - never
        silently lost.
        """
        if self._httpd is None:
            return
        self._closing = True
        for worker in list(self.workers.values()):
            worker.drain(grace if grace is not None else self.grace)
        with self._lock:
            for task in self.tasks.values():
                if not task.event.is_set():
                    task.fail("task aborted at server shutdown")
        self._httpd.shutdown()
        self._httpd.server_close()
        self._serve_thread.join(timeout=5)
        self._httpd = None

    def __enter__(self) -> "AgentServer":
        return self.start() if self._httpd is None else self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.stop()

    # -- request handling ------------------------------------------------------

    def _emit(self, msg: Msg | None) -> None:
        if msg is None or self.studio_url is None:
            return
        from .client import emit_to_studio

        emit_to_studio(self.studio_url, msg, source=f"{msg.name}@{self.host}:{self.port}")

    def _parse_msg_field(self, data: dict):
        raw = data.get("msg")
        if raw is None:
            return None
        return deserialize_msg(raw)

    def _handle_get(self, handler) -> None:
        from urllib.parse import parse_qs, urlparse

        parsed = urlparse(handler.path)
        if parsed.path == "/health":
            handler._send(200, {"status": "ok", "agents": len(self.workers)})
            return
        m = _TASK_PATH.match(parsed.path)
        if m:
            task_id = m.group(1)
            with self._lock:
                task = self.tasks.get(task_id)
            if task is None:
                handler._send(404, {"error": {"type": "ValidationError", "message": f"unknown task {task_id}"}})
                return
            wait_ms = int(parse_qs(parsed.query).get("wait_ms", ["0"])[0])
            task.event.wait(min(wait_ms, MAX_WAIT_MS) / 1000.0)
            if not task.event.is_set():
                handler._send(200, {"status": "pending"})
            elif task.error is not None:
                handler._send(200, {"status": "error", "error": {"type": task.error[0], "message": task.error[1]}})
            else:
                handler._send(200, {"status": "done", "msg": task.msg.to_dict()})
            return
        handler._send(404, {"error": {"type": "ValidationError", "message": f"no route {parsed.path}"}})

    def _handle_post(self, handler) -> None:
        path = handler.path
        if path == "/shutdown":
            handler._send(200, {"status": "shutting down"})
            threading.Thread(target=self.stop, daemon=True).start()
            return
        if path == "/agents":
            if self._closing:
                handler._send(503, {"error": {"type": "ValidationError", "message": "server shutting down"}})
                return
            data = handler._body()
            class_name = data.get("agent_class", "")
            try:
                if self.allowed is not None and class_name not in self.allowed:
                    raise ValidationError(f"agent class not allowed on this server: {class_name!r}")
                if class_name not in AGENT_CLASSES:
                    raise ValidationError(f"unknown agent class: {class_name!r}")
                agent = get_agent_class(class_name)(**data.get("agent_kwargs", {}))
            except ValidationError as e:
                handler._send(400, {"error": {"type": "ValidationError", "message": str(e)}})
                return
            agent_id = uuid.uuid4().hex
            with self._lock:
                self.workers[agent_id] = _AgentWorker(agent, self)
            handler._send(201, {"agent_id": agent_id})
            return
        m = _AGENT_PATH.match(path)
        if m:
            agent_id, action = m.groups()
            with self._lock:
                worker = self.workers.get(agent_id)
            if worker is None:
                handler._send(404, {"error": {"type": "ValidationError", "message": f"unknown agent {agent_id}"}})
                return
            data = handler._body()
            x = self._parse_msg_field(data)
            if action == "observe":
                worker.enqueue_observe(x)
                handler._send(204)
                return
            task = _Task()
            task_id = uuid.uuid4().hex
            with self._lock:
                self.tasks[task_id] = task
            worker.enqueue_call(task, x, data.get("kwargs") or {})
            handler._send(202, {"task_id": task_id})
            return
        handler._send(404, {"error": {"type": "ValidationError", "message": f"no route {path}"}})
