"""Compile a workflow graph to a runnable Python program.

The emitted program has three sections in a fixed order: imports,
initialization (model registration, agent and pipeline construction), and
execution statements in topological order. It targets this library's own
API, so a compiled program run against the same backends produces a
transcript identical to direct execution; it prints one serialized
message per line to stdout.
"""

from __future__ import annotations

import json
from typing import Iterable

from ..errors import CompileError, GraphValidationError
from .graph import WorkflowGraph, topological_order, validate_graph


def _py_name(prefix: str, node_id: str) -> str:
    safe = "".join(ch if ch.isalnum() or ch == "_" else "_" for ch in node_id)
    if not safe or safe[0].isdigit():
        safe = "_" + safe
    return f"{prefix}_{safe}"


def _literal(value) -> str:
    """Render a JSON-representable value as a Python literal."""
    return repr(json.loads(json.dumps(value)))


class _Emitter:
    def __init__(self):
        self.imports: set[str] = set()
        self.init: list[str] = []
        self.exec: list[str] = []

    def need(self, module: str, name: str) -> None:
        self.imports.add(f"from {module} import {name}")


def _emit_inputs(node, graph: WorkflowGraph, em: _Emitter) -> str | None:
    """Emit the runtime input-gathering list; returns its variable name."""
    inputs = [i for i in node.inputs]
    if not inputs:
        return None
    var = _py_name("ins", node.id)
    refs = ", ".join(_py_name("out", i) for i in inputs)
    em.exec.append(f"{var} = [m for m in [{refs}] if m is not None]")
    return var


def compile_workflow(graph: WorkflowGraph, known_model_configs: Iterable[str] = ()) -> str:
    """Translate a validated graph into Python source text."""
    problems = validate_graph(graph, known_model_configs)
    if problems:
        raise GraphValidationError(problems)

    em = _Emitter()
    em.need("agentmesh.msg", "Msg")
    em.need("agentmesh.msg", "as_msg")
    em.need("agentmesh.msg", "serialize_msg")
    em.need("agentmesh.models", "register_configs")
    nodes = graph.by_id

    for nid in topological_order(graph):
        node = nodes[nid]
        out = _py_name("out", nid)

        if node.kind == "model":
            em.need("agentmesh.workflow.run", "register_model_config")
            em.init.append(f"register_model_config({_literal(node.payload)})")
            em.exec.append(f"{out} = None")
            continue

        if node.kind == "message":
            p = node.payload
            kwargs = {
                "name": p["name"],
                "content": p.get("content", ""),
                "role": p.get("role", "assistant"),
                "url": p.get("url"),
                "metadata": p.get("metadata"),
            }
            em.exec.append(f"{out} = Msg(**{_literal(kwargs)})")
            em.exec.append(f"transcript.append({out})")
            continue

        if node.kind == "agent":
            if "ref" in node.payload:
                raise CompileError(
                    f"node {nid}: runtime-provided agents (ref) cannot be compiled "
                    "into a standalone program",
                    node_id=nid,
                )
            em.need("agentmesh.agents.config", "AgentConfig")
            agent_var = _py_name("agent", nid)
            cfg = {"agent_class": node.payload["agent_class"], "args": node.payload.get("args", {})}
            build = f"AgentConfig.from_dict({_literal(cfg)}).build()"
            dist = node.payload.get("to_dist")
            if dist:
                em.need("agentmesh.rpc", "to_dist")
                build = (
                    f"to_dist({build}, host={_literal(dist.get('host', '127.0.0.1'))}, "
                    f"port={_literal(dist.get('port'))})"
                )
            em.init.append(f"{agent_var} = {build}")
            ins = _emit_inputs(node, graph, em)
            if ins is None:
                em.exec.append(f"{out} = {agent_var}(None)")
            else:
                em.exec.append(f"for m in {ins}[:-1]:")
                em.exec.append(f"    {agent_var}.observe(m)")
                em.exec.append(f"{out} = {agent_var}({ins}[-1] if {ins} else None)")
            em.exec.append(f"transcript.append({out})")
            continue

        if node.kind == "pipeline":
            em.need("agentmesh.agents.config", "AgentConfig")
            p = node.payload
            kind = p["kind"]
            ins = _emit_inputs(node, graph, em)
            x_expr = f"{ins}[0] if {ins} else None" if ins else "None"

            def ops_var(suffix: str, configs) -> str:
                var = _py_name(f"ops{suffix}", nid)
                em.init.append(
                    f"{var} = [AgentConfig.from_dict(c).build() for c in {_literal(list(configs))}]"
                )
                return var

            if kind == "sequential":
                em.need("agentmesh.pipelines", "sequential")
                em.exec.append(f"{out} = sequential({ops_var('', p['agents'])}, {x_expr})")
            elif kind == "forloop":
                em.need("agentmesh.pipelines", "forloop")
                em.exec.append(
                    f"{out} = forloop({ops_var('', p['agents'])}, {p['n']}, {x_expr})"
                )
            elif kind == "whileloop":
                em.need("agentmesh.pipelines", "whileloop")
                em.need("agentmesh.workflow.run", "content_predicate")
                cond = p["condition"]
                pred_var = _py_name("pred", nid)
                em.init.append(
                    f"{pred_var} = content_predicate({_literal(cond['op'])}, {_literal(cond['value'])})"
                )
                max_it = p.get("max_iterations", 1024)
                em.exec.append(
                    f"{out} = whileloop({ops_var('', p['agents'])}, "
                    f"lambda _i, m: {pred_var}(m), {x_expr}, {max_it})"
                )
            elif kind == "ifelse":
                em.need("agentmesh.pipelines", "ifelse")
                em.need("agentmesh.workflow.run", "content_predicate")
                cond = p["condition"]
                pred_var = _py_name("pred", nid)
                em.init.append(
                    f"{pred_var} = content_predicate({_literal(cond['op'])}, {_literal(cond['value'])})"
                )
                then_var = ops_var("_then", p["then"])
                else_expr = ops_var("_else", p["else"]) if p.get("else") else "None"
                em.exec.append(f"{out} = ifelse({pred_var}, {then_var}, {else_expr}, {x_expr})")
            elif kind == "switch":
                em.need("agentmesh.pipelines", "switch")
                em.need("agentmesh.workflow.run", "content_selector")
                case_vars = {
                    key: ops_var(f"_case{i}", cfgs)
                    for i, (key, cfgs) in enumerate(p["cases"].items())
                }
                cases_expr = "{" + ", ".join(f"{k!r}: {v}" for k, v in case_vars.items()) + "}"
                default_expr = ops_var("_default", p["default"]) if p.get("default") else "None"
                em.exec.append(
                    f"{out} = switch(content_selector, {cases_expr}, {default_expr}, {x_expr})"
                )
            else:
                raise CompileError(f"node {nid}: unsupported pipeline kind {kind!r}", node_id=nid)
            em.exec.append(f"if {out} is not None:")
            em.exec.append(f"    transcript.append({out})")
            continue

        if node.kind == "service":
            em.need("agentmesh.workflow.run", "call_service")
            ins = _emit_inputs(node, graph, em)
            x_expr = f"{ins}[0] if {ins} else None" if ins else "None"
            em.exec.append(
                f"{out} = call_service({_literal(node.payload['tool'])}, "
                f"{_literal(node.payload.get('args', {}))}, "
                f"{_literal(node.payload.get('preset', {}))}, {x_expr}, node_id={_literal(nid)})"
            )
            em.exec.append(f"transcript.append({out})")
            continue

        if node.kind == "copy":
            ins = _emit_inputs(node, graph, em)
            em.exec.append(f"{out} = {ins}[0] if {ins} else None")
            continue

        raise CompileError(f"node {nid}: unsupported kind {node.kind!r}", node_id=nid)

    lines: list[str] = ['"""Workflow program generated from a graph description."""', ""]
    lines.append("import argparse")
    lines.append("")
    lines.extend(sorted(em.imports))
    lines += [
        "",
        "",
        "def main() -> None:",
        "    parser = argparse.ArgumentParser(description='run the workflow')",
        "    parser.add_argument('--models', default=None, help='extra model configs (JSON file)')",
        "    args = parser.parse_args()",
        "    if args.models:",
        "        register_configs(args.models)",
        "",
    ]
    for stmt in em.init:
        lines.append("    " + stmt)
    lines += ["", "    transcript = []", ""]
    for stmt in em.exec:
        lines.append("    " + stmt)
    lines += [
        "",
        "    for m in transcript:",
        "        print(serialize_msg(as_msg(m)))",
        "",
        "",
        "if __name__ == '__main__':",
        "    main()",
        "",
    ]
    return "\n".join(lines)
