"""Studio backend: the live console hub for multi-agent runs.

Gathers messages posted by local runtimes and distributed agent servers
into one sequence-numbered event stream, fans that stream out to
WebSocket clients in order, relays human input into waiting agents, and
manages registered agent servers. Events are kept in a ring buffer (10k)
so reconnecting clients can replay what they missed; the studio is a live
console, not a datastore.

Event kinds: ``message``, ``input_request``, ``input_response``,
``server_status``. Every event is ``{"kind", "payload", "seq"}`` with
``seq`` strictly increasing per studio instance.
"""

from __future__ import annotations

import asyncio
import uuid
from collections import deque
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Query, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse, JSONResponse

from .errors import DeserializationError
from .msg import Msg, deserialize_msg

RING_SIZE = 10_000
MAX_WAIT_MS = 30_000

_FALLBACK_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>agentmesh studio</title></head>
<body>
<h1>agentmesh studio</h1>
<p>The studio backend is running. Build the frontend and pass
--static-dir to serve the full console; this page is a minimal fallback.</p>
<pre id="feed"></pre>
<script>
const feed = document.getElementById("feed");
const ws = new WebSocket((location.protocol === "https:" ? "wss" : "ws") + "://" + location.host + "/ws");
ws.onmessage = (ev) => { feed.textContent += ev.data + "\\n"; };
</script>
</body></html>
"""


class _InputRequest:
    __slots__ = ("request_id", "prompt", "agent_name", "timeout", "event", "content", "responded")

    def __init__(self, request_id: str, prompt: str, agent_name: str, timeout: float | None):
        self.request_id = request_id
        self.prompt = prompt
        self.agent_name = agent_name
        self.timeout = timeout
        self.event = asyncio.Event()
        self.content: str | None = None
        self.responded = False


class StudioState:
    """All mutable studio state; touched only on the event loop."""

    def __init__(self):
        self.seq = 0
        self.events: deque[dict[str, Any]] = deque(maxlen=RING_SIZE)
        self.clients: set[asyncio.Queue] = set()
        self.inputs: dict[str, _InputRequest] = {}
        self.servers: dict[str, dict[str, Any]] = {}
        self.lock = asyncio.Lock()

    async def publish(self, kind: str, payload: dict[str, Any]) -> dict[str, Any]:
        async with self.lock:
            self.seq += 1
            event = {"kind": kind, "payload": payload, "seq": self.seq}
            self.events.append(event)
            for q in self.clients:
                q.put_nowait(event)
            return event

    async def attach(self, since: int) -> tuple[list[dict[str, Any]], asyncio.Queue]:
        # Snapshot and registration are atomic, so an event lands either in
        # the replay batch or in the live queue, never both or neither.
        async with self.lock:
            replay = [e for e in self.events if e["seq"] > since]
            q: asyncio.Queue = asyncio.Queue()
            self.clients.add(q)
            return replay, q

    async def detach(self, q: asyncio.Queue) -> None:
        async with self.lock:
            self.clients.discard(q)


def create_app(static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="agentmesh studio")
    state = StudioState()
    app.state.studio = state
    static_root = Path(static_dir) if static_dir else None

    # -- frontend ---------------------------------------------------------

    @app.get("/")
    async def index() -> HTMLResponse:
        if static_root is not None:
            page = static_root / "index.html"
            if page.exists():
                return HTMLResponse(page.read_text(encoding="utf-8"))
        return HTMLResponse(_FALLBACK_PAGE)

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/static", StaticFiles(directory=str(static_dir)), name="static")

    # -- message gathering --------------------------------------------------

    @app.post("/api/messages", status_code=202)
    async def ingest_message(body: dict) -> JSONResponse:
        raw = body.get("msg")
        if raw is None:
            return JSONResponse({"error": "missing msg"}, status_code=400)
        try:
            msg = deserialize_msg(raw)
        except DeserializationError as e:
            return JSONResponse({"error": str(e)}, status_code=400)
        if not isinstance(msg, Msg):
            return JSONResponse({"error": "placeholders cannot be displayed"}, status_code=400)
        event = await state.publish(
            "message", {"msg": msg.to_dict(), "source": body.get("source")}
        )
        return JSONResponse({"seq": event["seq"]}, status_code=202)

    @app.websocket("/ws")
    async def stream(ws: WebSocket, since: int = Query(default=0)):
        await ws.accept()
        replay, q = await state.attach(since)
        try:
            for event in replay:
                await ws.send_json(event)
            while True:
                await ws.send_json(await q.get())
        except WebSocketDisconnect:
            pass
        finally:
            await state.detach(q)

    # -- human input bridging ---------------------------------------------------

    @app.post("/api/input_request", status_code=202)
    async def request_user_input(body: dict) -> JSONResponse:
        request_id = body.get("request_id") or uuid.uuid4().hex
        if request_id in state.inputs:
            return JSONResponse({"error": f"duplicate request_id {request_id}"}, status_code=409)
        req = _InputRequest(
            request_id, body.get("prompt", ""), body.get("agent_name", "User"), body.get("timeout")
        )
        state.inputs[request_id] = req
        await state.publish(
            "input_request",
            {
                "request_id": request_id,
                "prompt": req.prompt,
                "agent_name": req.agent_name,
                "timeout": req.timeout,
            },
        )
        return JSONResponse({"request_id": request_id}, status_code=202)

    @app.get("/api/input_requests")
    async def pending_inputs() -> list[dict[str, Any]]:
        return [
            {"request_id": r.request_id, "prompt": r.prompt, "agent_name": r.agent_name}
            for r in state.inputs.values()
            if not r.responded
        ]

    @app.get("/api/input_response/{request_id}")
    async def poll_input(request_id: str, wait_ms: int = Query(default=0)) -> JSONResponse:
        req = state.inputs.get(request_id)
        if req is None:
            return JSONResponse({"error": f"unknown request {request_id}"}, status_code=404)
        try:
            await asyncio.wait_for(req.event.wait(), timeout=min(wait_ms, MAX_WAIT_MS) / 1000.0)
        except asyncio.TimeoutError:
            return JSONResponse({"status": "pending"})
        return JSONResponse({"status": "done", "content": req.content})

    @app.post("/api/input_response")
    async def submit_input(body: dict) -> JSONResponse:
        request_id = body.get("request_id", "")
        req = state.inputs.get(request_id)
        if req is None:
            return JSONResponse({"error": f"unknown request {request_id}"}, status_code=404)
        if req.responded:
            # First valid response wins; the slow responder learns why.
            return JSONResponse({"error": "request already answered"}, status_code=409)
        req.responded = True
        req.content = str(body.get("content", ""))
        req.event.set()
        await state.publish(
            "input_response", {"request_id": request_id, "content": req.content}
        )
        return JSONResponse({"status": "ok"})

    # -- server panel ----------------------------------------------------------

    async def _probe(server: dict[str, Any]) -> dict[str, Any]:
        import httpx

        url = f"http://{server['host']}:{server['port']}/health"
        try:
            async with httpx.AsyncClient(timeout=2.0) as client:
                resp = await client.get(url)
            body = resp.json()
            server["status"] = "running" if body.get("status") == "ok" else "unhealthy"
            server["agents"] = body.get("agents", 0)
        except Exception:
            server["status"] = "unreachable"
        return server

    @app.get("/api/servers")
    async def list_servers() -> list[dict[str, Any]]:
        servers = [dict(s) for s in state.servers.values()]
        return list(await asyncio.gather(*(_probe(s) for s in servers)))

    @app.post("/api/servers", status_code=201)
    async def register_server(body: dict) -> JSONResponse:
        if "host" not in body or "port" not in body:
            return JSONResponse({"error": "host and port required"}, status_code=400)
        server_id = uuid.uuid4().hex[:8]
        entry = {
            "id": server_id,
            "host": body["host"],
            "port": int(body["port"]),
            "status": "running",
            "agents": 0,
        }
        state.servers[server_id] = entry
        await state.publish("server_status", dict(entry))
        return JSONResponse({"id": server_id}, status_code=201)

    @app.post("/api/servers/{server_id}/shutdown")
    async def shutdown_server(server_id: str) -> JSONResponse:
        import httpx

        entry = state.servers.get(server_id)
        if entry is None:
            return JSONResponse({"error": f"unknown server {server_id}"}, status_code=404)
        try:
            async with httpx.AsyncClient(timeout=5.0) as client:
                await client.post(f"http://{entry['host']}:{entry['port']}/shutdown")
            entry["status"] = "stopped"
        except Exception as e:
            entry["status"] = "unreachable"
            await state.publish("server_status", dict(entry))
            return JSONResponse({"error": f"shutdown failed: {e}"}, status_code=502)
        await state.publish("server_status", dict(entry))
        return JSONResponse({"status": "stopped"})

    return app
