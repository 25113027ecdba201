"""Command-line entry points.

Subcommands: ``run`` executes a workflow JSON (transcript in CHAT human
format on stdout, JSONL in the run directory), ``validate`` and
``compile`` check and translate workflow files, ``server`` hosts an agent
server until interrupted, ``studio`` serves the live console backend plus
its frontend.

Exit code contract: 0 success, 1 validation failure, 2 runtime failure,
3 budget or timeout.
"""

from __future__ import annotations

import argparse
import random
import signal
import sys
import time
from pathlib import Path

from .errors import (
    AgentMeshError,
    BudgetExceededError,
    GraphValidationError,
    InputTimeoutError,
    ResolutionTimeoutError,
    ValidationError,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_BUDGET_OR_TIMEOUT = 3


def _exit_code(e: BaseException) -> int:
    if isinstance(e, (BudgetExceededError, InputTimeoutError, ResolutionTimeoutError)):
        return EXIT_BUDGET_OR_TIMEOUT
    if isinstance(e, (GraphValidationError, ValidationError)):
        return EXIT_VALIDATION
    return EXIT_RUNTIME


def _register_models(path: str | None) -> None:
    if path:
        from .models import register_configs

        register_configs(path)


def _named_agents(path: str | None) -> dict:
    if not path:
        return {}
    from .agents.config import build_agents

    agents = build_agents(path)
    return {a.name: a for a in agents}


def cmd_run(args: argparse.Namespace) -> int:
    from .models import get_registry
    from .monitor import configure_logging, log_chat, run_dir
    from .workflow import load_workflow, run_workflow

    if args.seed is not None:
        random.seed(args.seed)
    try:
        _register_models(args.models)
        named = _named_agents(args.agents)
        graph = load_workflow(args.workflow, known_model_configs=get_registry().config_names())
    except GraphValidationError as e:
        print(str(e), file=sys.stderr)
        return EXIT_VALIDATION
    except AgentMeshError as e:
        print(f"error: {e}", file=sys.stderr)
        return _exit_code(e)

    configure_logging(
        "CHAT",
        stream=sys.stdout,
        jsonl_path=run_dir() / "chat.jsonl",
        studio_url=args.studio,
        colorize=sys.stdout.isatty(),
    )
    try:
        transcript = run_workflow(graph, named_agents=named)
    except AgentMeshError as e:
        print(f"error: {e}", file=sys.stderr)
        return _exit_code(e)
    for m in transcript:
        log_chat(m, source="run")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    from .models import get_registry
    from .workflow import load_workflow

    try:
        _register_models(args.models)
        load_workflow(args.workflow, known_model_configs=get_registry().config_names())
    except GraphValidationError as e:
        print(str(e), file=sys.stderr)
        return EXIT_VALIDATION
    except AgentMeshError as e:
        print(f"error: {e}", file=sys.stderr)
        return _exit_code(e)
    print("OK")
    return EXIT_OK


def cmd_compile(args: argparse.Namespace) -> int:
    from .models import get_registry
    from .workflow import compile_workflow, load_workflow

    try:
        _register_models(args.models)
        graph = load_workflow(args.workflow, known_model_configs=get_registry().config_names())
        source = compile_workflow(graph, known_model_configs=get_registry().config_names())
    except GraphValidationError as e:
        print(str(e), file=sys.stderr)
        return EXIT_VALIDATION
    except AgentMeshError as e:
        print(f"error: {e}", file=sys.stderr)
        return _exit_code(e)
    Path(args.output).write_text(source, encoding="utf-8")
    print(f"wrote {args.output}")
    return EXIT_OK


def cmd_server(args: argparse.Namespace) -> int:
    from .rpc import register_with_studio
    from .rpc.server import AgentServer

    try:
        _register_models(args.models)
    except AgentMeshError as e:
        print(f"error: {e}", file=sys.stderr)
        return _exit_code(e)
    try:
        server = AgentServer(
            host=args.host,
            port=args.port,
            allowed_agent_classes=args.allowed_classes.split(",") if args.allowed_classes else None,
            studio_url=args.studio,
        ).start()
    except OSError as e:
        print(f"error: cannot bind {args.host}:{args.port}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"agent server listening on {server.url}", file=sys.stderr)
    if args.studio:
        register_with_studio(args.studio, args.host, server.port)

    stopping = False

    def handle_signal(signum, frame):
        nonlocal stopping
        stopping = True

    signal.signal(signal.SIGTERM, handle_signal)
    try:
        while not stopping and server._httpd is not None:
            time.sleep(0.2)
    except KeyboardInterrupt:
        pass
    server.stop()
    return EXIT_OK


def cmd_studio(args: argparse.Namespace) -> int:
    import socket

    import uvicorn

    from .studio import create_app

    # Probe the port up front so a conflict maps to the runtime exit code
    # instead of uvicorn's own failure path.
    probe = socket.socket()
    try:
        probe.bind((args.host, args.port))
    except OSError as e:
        print(f"error: cannot bind {args.host}:{args.port}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    finally:
        probe.close()

    app = create_app(static_dir=args.static_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="agentmesh", description="multi-agent runtime CLI")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a workflow JSON file")
    run.add_argument("workflow")
    run.add_argument("--models", help="model configs JSON file")
    run.add_argument("--agents", help="named agent configs JSON file")
    run.add_argument("--studio", help="studio URL to forward messages to")
    run.add_argument("--seed", type=int, help="seed for deterministic runs")
    run.set_defaults(fn=cmd_run)

    val = sub.add_parser("validate", help="statically check a workflow JSON file")
    val.add_argument("workflow")
    val.add_argument("--models", help="model configs JSON file")
    val.set_defaults(fn=cmd_validate)

    comp = sub.add_parser("compile", help="compile a workflow to a Python program")
    comp.add_argument("workflow")
    comp.add_argument("-o", "--output", required=True)
    comp.add_argument("--models", help="model configs JSON file")
    comp.set_defaults(fn=cmd_compile)

    srv = sub.add_parser("server", help="run an agent server")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8700)
    srv.add_argument("--models", help="model configs JSON file")
    srv.add_argument("--allowed-classes", help="comma-separated allowed agent classes")
    srv.add_argument("--studio", help="studio URL to register with")
    srv.set_defaults(fn=cmd_server)

    studio = sub.add_parser("studio", help="run the studio console backend")
    studio.add_argument("--host", default="127.0.0.1")
    studio.add_argument("--port", type=int, default=8600)
    studio.add_argument("--static-dir", help="directory with the built frontend")
    studio.set_defaults(fn=cmd_studio)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
