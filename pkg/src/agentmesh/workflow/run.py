"""Direct execution of workflow graphs.

Nodes run in topological order (ties broken by node id), each consuming
its predecessors' outputs. The transcript collects every message a node
produces, in execution order; pipeline nodes contribute their final
output. Remote agent nodes return placeholders that are only resolved
after all nodes have been scheduled, so independent branches overlap in
time; the returned transcript is always fully resolved.
"""

from __future__ import annotations

from typing import Any, Callable, Iterable, Mapping

from ..agents.config import AgentConfig
from ..errors import GraphValidationError, NodeExecutionError, ValidationError
from ..models import get_registry
from ..models.backends import ScriptedChatModel
from ..msg import AnyMsg, Msg, as_msg
from ..pipelines import forloop, ifelse, sequential, switch, whileloop
from ..services.builtin import get_builtin_service
from ..services.response import ServiceResponse
from .graph import WorkflowGraph, topological_order, validate_graph


def register_model_config(config: dict[str, Any]) -> None:
    """Register a model-node config, tolerating identical re-registration.

    Re-running a graph in one process re-registers the same configs; when
    the config is unchanged, its scripted backend (if already built) is
    reset so the script starts fresh. A conflicting config under the same
    name is an error.
    """
    from ..models.config import ModelConfig

    registry = get_registry()
    cfg = ModelConfig.from_dict(dict(config))
    try:
        existing = registry.get_config(cfg.config_name)
    except ValidationError:
        registry.register([cfg])
        return
    if existing.to_dict() != cfg.to_dict():
        raise ValidationError(
            f"model config {cfg.config_name!r} already registered with different settings"
        )
    backend = registry.get_backend(cfg.config_name)
    if isinstance(backend, ScriptedChatModel):
        registry._backends[cfg.config_name] = ScriptedChatModel(existing)


def content_predicate(op: str, value: str) -> Callable[[AnyMsg | None], bool]:
    """Build the content predicate used by conditional workflow nodes."""

    def pred(x: AnyMsg | None) -> bool:
        content = as_msg(x).content if x is not None else ""
        if op == "eq":
            return content == value
        if op == "ne":
            return content != value
        if op == "contains":
            return value in content
        raise ValidationError(f"unknown predicate op {op!r}")

    return pred


def content_selector(x: AnyMsg | None) -> str:
    return as_msg(x).content if x is not None else ""


def call_service(
    tool: str,
    args: Mapping[str, Any],
    preset: Mapping[str, Any] | None = None,
    input_msg: AnyMsg | None = None,
    node_id: str = "service",
) -> Msg:
    """Execute a built-in service function for a workflow node.

    Argument values equal to ``"$input"`` are replaced by the input
    message's content. An error envelope from the tool fails the node: a
    workflow must not continue on a diagnostic as if it were data.
    """
    fn = get_builtin_service(tool)
    kwargs = dict(preset or {})
    for key, value in args.items():
        if value == "$input":
            kwargs[key] = as_msg(input_msg).content if input_msg is not None else ""
        else:
            kwargs[key] = value
    result = fn(**kwargs)
    if isinstance(result, ServiceResponse) and not result.ok:
        raise NodeExecutionError(f"service {tool} failed: {result.content}", node_id=node_id)
    content = result.content if isinstance(result, ServiceResponse) else result
    return Msg(node_id, content if isinstance(content, str) else repr(content))


def _build_operands(configs: Iterable[Mapping[str, Any]]) -> list:
    return [AgentConfig.from_dict(dict(cfg)).build() for cfg in configs]


def _build_agent(node, named_agents: Mapping[str, Any]):
    payload = node.payload
    if "ref" in payload:
        name = payload["ref"]
        agent = named_agents.get(name)
        if agent is None:
            raise ValidationError(f"no runtime agent named {name!r} provided")
        return agent
    agent = AgentConfig.from_dict(
        {"agent_class": payload["agent_class"], "args": payload.get("args", {})}
    ).build()
    dist = payload.get("to_dist")
    if dist:
        from ..rpc import to_dist

        agent = to_dist(agent, host=dist.get("host", "127.0.0.1"), port=dist.get("port"))
    return agent


def _run_pipeline_node(node, x: AnyMsg | None):
    payload = node.payload
    kind = payload["kind"]
    if kind == "sequential":
        return sequential(_build_operands(payload["agents"]), x)
    if kind == "forloop":
        return forloop(_build_operands(payload["agents"]), payload["n"], x)
    if kind == "whileloop":
        cond = payload["condition"]
        pred = content_predicate(cond["op"], cond["value"])
        return whileloop(
            _build_operands(payload["agents"]),
            lambda _i, m: pred(m),
            x,
            payload.get("max_iterations", 1024),
        )
    if kind == "ifelse":
        cond = payload["condition"]
        then_ops = _build_operands(payload["then"])
        else_ops = _build_operands(payload["else"]) if payload.get("else") else None
        return ifelse(content_predicate(cond["op"], cond["value"]), then_ops, else_ops, x)
    if kind == "switch":
        cases = {key: _build_operands(cfgs) for key, cfgs in payload["cases"].items()}
        default = _build_operands(payload["default"]) if payload.get("default") else None
        return switch(content_selector, cases, default, x)
    raise ValidationError(f"unknown pipeline kind {kind!r}")


def run_workflow(
    graph: WorkflowGraph,
    named_agents: Mapping[str, Any] | None = None,
    known_model_configs: Iterable[str] | None = None,
) -> list[Msg]:
    """Execute a graph and return the ordered, fully-resolved transcript."""
    known = (
        list(known_model_configs)
        if known_model_configs is not None
        else get_registry().config_names()
    )
    problems = validate_graph(graph, known)
    if problems:
        raise GraphValidationError(problems)

    nodes = graph.by_id
    named = dict(named_agents or {})
    outputs: dict[str, AnyMsg | None] = {}
    transcript: list[AnyMsg] = []

    for nid in topological_order(graph):
        node = nodes[nid]
        inputs = [outputs[i] for i in node.inputs if outputs.get(i) is not None]
        try:
            if node.kind == "model":
                register_model_config(node.payload)
                outputs[nid] = None
            elif node.kind == "message":
                p = node.payload
                out = Msg(
                    p["name"],
                    p.get("content", ""),
                    role=p.get("role", "assistant"),
                    url=p.get("url"),
                    metadata=p.get("metadata"),
                )
                outputs[nid] = out
                transcript.append(out)
            elif node.kind == "agent":
                agent = _build_agent(node, named)
                for extra in inputs[:-1]:
                    agent.observe(extra)
                out = agent(inputs[-1] if inputs else None)
                outputs[nid] = out
                transcript.append(out)
            elif node.kind == "pipeline":
                out = _run_pipeline_node(node, inputs[0] if inputs else None)
                outputs[nid] = out
                if out is not None:
                    transcript.append(out)
            elif node.kind == "service":
                out = call_service(
                    node.payload["tool"],
                    node.payload.get("args", {}),
                    node.payload.get("preset", {}),
                    inputs[0] if inputs else None,
                    node_id=nid,
                )
                outputs[nid] = out
                transcript.append(out)
            elif node.kind == "copy":
                outputs[nid] = inputs[0] if inputs else None
            else:
                raise ValidationError(f"unknown node kind {node.kind!r}")
        except NodeExecutionError:
            raise
        except Exception as e:
            raise NodeExecutionError(f"node {nid} failed: {e}", node_id=nid, cause=e) from e

    return [as_msg(m) for m in transcript]
