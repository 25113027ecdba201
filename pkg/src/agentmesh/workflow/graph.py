"""Workflow graphs: typed nodes plus dependency edges.

A workflow JSON document is ``{"nodes": [{"id", "kind", "payload",
"inputs": [...]}]}``. Six node kinds exist:

- ``model``: a model configuration to register; independent of the data
  flow, so it takes no inputs.
- ``message``: emits a literal message (``name``, ``content``, optional
  ``role``/``url``/``metadata``).
- ``agent``: an agent config (``agent_class`` + ``args``), or
  ``{"ref": name}`` for an agent provided by the runtime; replies to its
  input. Optional ``to_dist`` ``{"host", "port"}`` runs it remotely.
- ``pipeline``: a combinator descriptor (``kind`` of sequential/ifelse/
  switch/whileloop/forloop, operand ``agents`` as agent configs, plus
  kind-specific fields) applied to the node's input.
- ``service``: ``{"tool", "args", "preset"}`` executing a built-in
  service function; argument values equal to ``"$input"`` are replaced by
  the input message's content.
- ``copy``: forwards its single input unchanged to all successors.

Static validation reports every problem found (unknown kinds, dangling
edges, cycles, missing model references, malformed payloads) in one
aggregated report rather than stopping at the first.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from heapq import heappop, heappush
from pathlib import Path
from typing import Any, Iterable, Mapping

from ..errors import GraphValidationError, ValidationError

NODE_KINDS = ("model", "agent", "pipeline", "service", "message", "copy")
PIPELINE_KINDS = ("sequential", "ifelse", "switch", "whileloop", "forloop")
PREDICATE_OPS = ("eq", "ne", "contains")

_MESSAGE_KEYS = {"name", "content", "role", "url", "metadata"}


@dataclass
class WorkflowNode:
    id: str
    kind: str
    payload: dict[str, Any] = field(default_factory=dict)
    inputs: list[str] = field(default_factory=list)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "WorkflowNode":
        missing = [k for k in ("id", "kind") if k not in data]
        if missing:
            raise ValidationError(f"workflow node missing fields: {missing}")
        unknown = set(data) - {"id", "kind", "payload", "inputs"}
        if unknown:
            raise ValidationError(f"workflow node {data['id']!r}: unknown keys {sorted(unknown)}")
        return cls(
            id=str(data["id"]),
            kind=data["kind"],
            payload=dict(data.get("payload", {})),
            inputs=[str(i) for i in data.get("inputs", [])],
        )

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.id, "kind": self.kind, "payload": self.payload, "inputs": self.inputs}


@dataclass
class WorkflowGraph:
    nodes: list[WorkflowNode]

    @property
    def by_id(self) -> dict[str, WorkflowNode]:
        return {n.id: n for n in self.nodes}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "WorkflowGraph":
        if "nodes" not in data or not isinstance(data["nodes"], list):
            raise ValidationError('workflow document must contain a "nodes" array')
        return cls(nodes=[WorkflowNode.from_dict(n) for n in data["nodes"]])

    def to_dict(self) -> dict[str, Any]:
        return {"nodes": [n.to_dict() for n in self.nodes]}


def _find_cycle(nodes: dict[str, WorkflowNode]) -> list[str] | None:
    """Return one dependency cycle as a list of node ids, if any."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {nid: WHITE for nid in nodes}
    parent: dict[str, str] = {}

    for root in sorted(nodes):
        if color[root] != WHITE:
            continue
        stack: list[tuple[str, Iterable[str]]] = [(root, iter(nodes[root].inputs))]
        color[root] = GRAY
        while stack:
            nid, it = stack[-1]
            advanced = False
            for dep in it:
                if dep not in nodes:
                    continue
                if color[dep] == GRAY:
                    cycle = [dep, nid]
                    cur = nid
                    while cur != dep and cur in parent:
                        cur = parent[cur]
                        if cur != dep:
                            cycle.insert(1, cur)
                    return cycle
                if color[dep] == WHITE:
                    color[dep] = GRAY
                    parent[dep] = nid
                    stack.append((dep, iter(nodes[dep].inputs)))
                    advanced = True
                    break
            if not advanced:
                color[nid] = BLACK
                stack.pop()
    return None


def _check_predicate(problems: list[str], nid: str, pred: Any, context: str) -> None:
    if not isinstance(pred, dict) or "op" not in pred or "value" not in pred:
        problems.append(f"node {nid}: {context} must be {{op, value}}")
        return
    if pred["op"] not in PREDICATE_OPS:
        problems.append(f"node {nid}: {context} has unknown op {pred['op']!r}")


def _check_agent_payload(
    problems: list[str], nid: str, payload: Mapping[str, Any], model_names: set[str]
) -> None:
    if "ref" in payload:
        return
    if "agent_class" not in payload:
        problems.append(f"node {nid}: agent payload requires agent_class (or ref)")
        return
    ref = payload.get("args", {}).get("model_config_name")
    if ref is not None and ref not in model_names:
        problems.append(f"node {nid}: references unknown model config {ref!r}")


def validate_graph(graph: WorkflowGraph, known_model_configs: Iterable[str] = ()) -> list[str]:
    """Run every static check; return all problems found (empty if valid)."""
    problems: list[str] = []
    seen: dict[str, int] = {}
    for n in graph.nodes:
        seen[n.id] = seen.get(n.id, 0) + 1
    for nid, count in seen.items():
        if count > 1:
            problems.append(f"duplicate node id: {nid}")
    nodes = graph.by_id

    model_names = set(known_model_configs)
    declared: dict[str, str] = {}
    for n in graph.nodes:
        if n.kind == "model":
            name = n.payload.get("config_name")
            if not name:
                problems.append(f"node {n.id}: model payload requires config_name")
                continue
            if name in declared:
                problems.append(
                    f"node {n.id}: model config {name!r} already declared by node {declared[name]}"
                )
            declared[name] = n.id
            model_names.add(name)

    for n in graph.nodes:
        if n.kind not in NODE_KINDS:
            problems.append(f"node {n.id}: unknown kind {n.kind!r}")
            continue
        for dep in n.inputs:
            if dep not in nodes:
                problems.append(f"node {n.id}: input references missing node {dep}")
            elif dep == n.id:
                problems.append(f"node {n.id}: depends on itself")
        if len(set(n.inputs)) != len(n.inputs):
            problems.append(f"node {n.id}: duplicate inputs")

        if n.kind == "model" and n.inputs:
            problems.append(f"node {n.id}: model nodes take no inputs")
        elif n.kind == "message":
            unknown = set(n.payload) - _MESSAGE_KEYS
            if unknown:
                problems.append(f"node {n.id}: message payload has unknown keys {sorted(unknown)}")
            if not n.payload.get("name"):
                problems.append(f"node {n.id}: message payload requires a name")
            if "content" not in n.payload:
                problems.append(f"node {n.id}: message payload requires content")
        elif n.kind == "agent":
            _check_agent_payload(problems, n.id, n.payload, model_names)
        elif n.kind == "pipeline":
            kind = n.payload.get("kind")
            if kind not in PIPELINE_KINDS:
                problems.append(f"node {n.id}: unknown pipeline kind {kind!r}")
                continue
            agents = n.payload.get("agents")
            if kind in ("sequential", "whileloop", "forloop") and not agents:
                problems.append(f"node {n.id}: pipeline requires a non-empty agents list")
            for cfg in agents or []:
                if "agent_class" not in cfg:
                    problems.append(f"node {n.id}: pipeline operand missing agent_class")
                    continue
                ref = cfg.get("args", {}).get("model_config_name")
                if ref is not None and ref not in model_names:
                    problems.append(f"node {n.id}: references unknown model config {ref!r}")
            if kind == "forloop" and not isinstance(n.payload.get("n"), int):
                problems.append(f"node {n.id}: forloop requires an integer n")
            if kind == "whileloop":
                _check_predicate(problems, n.id, n.payload.get("condition"), "whileloop condition")
            if kind == "ifelse":
                _check_predicate(problems, n.id, n.payload.get("condition"), "ifelse condition")
                if not n.payload.get("then"):
                    problems.append(f"node {n.id}: ifelse requires a then branch")
                for cfg in (n.payload.get("then") or []) + (n.payload.get("else") or []):
                    ref = cfg.get("args", {}).get("model_config_name")
                    if ref is not None and ref not in model_names:
                        problems.append(f"node {n.id}: references unknown model config {ref!r}")
            if kind == "switch":
                if not isinstance(n.payload.get("cases"), dict) or not n.payload["cases"]:
                    problems.append(f"node {n.id}: switch requires a non-empty cases map")
        elif n.kind == "service":
            tool = n.payload.get("tool")
            if not tool:
                problems.append(f"node {n.id}: service payload requires a tool name")
            else:
                from ..services.builtin import BUILTIN_SERVICES

                if tool not in BUILTIN_SERVICES:
                    problems.append(f"node {n.id}: unknown service tool {tool!r}")
        elif n.kind == "copy":
            if len(n.inputs) != 1:
                problems.append(f"node {n.id}: copy nodes take exactly one input")

    if not any(p.startswith("duplicate node id") for p in problems):
        cycle = _find_cycle(nodes)
        if cycle:
            problems.append("cycle detected: " + " -> ".join(cycle + [cycle[0]]))
    return problems


def topological_order(graph: WorkflowGraph) -> list[str]:
    """Kahn's algorithm; ties broken by node id ascending for determinism."""
    nodes = graph.by_id
    indegree = {nid: 0 for nid in nodes}
    successors: dict[str, list[str]] = {nid: [] for nid in nodes}
    for n in graph.nodes:
        for dep in n.inputs:
            indegree[n.id] += 1
            successors[dep].append(n.id)
    heap = [nid for nid, deg in indegree.items() if deg == 0]
    import heapq

    heapq.heapify(heap)
    order: list[str] = []
    while heap:
        nid = heappop(heap)
        order.append(nid)
        for succ in successors[nid]:
            indegree[succ] -= 1
            if indegree[succ] == 0:
                heappush(heap, succ)
    if len(order) != len(nodes):
        raise ValidationError("graph is cyclic; run validation first")
    return order


def load_workflow(
    source: str | Path | Mapping[str, Any],
    known_model_configs: Iterable[str] = (),
) -> WorkflowGraph:
    """Parse and statically validate a workflow document.

    ``known_model_configs`` lists config names provided by the runtime
    (e.g. from a model config file) that agent nodes may reference without
    a model node in the graph.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        if not path.exists():
            raise ValidationError(f"workflow file not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise GraphValidationError([f"not valid JSON: {e}"]) from e
    else:
        data = source
    graph = WorkflowGraph.from_dict(data)
    problems = validate_graph(graph, known_model_configs)
    if problems:
        raise GraphValidationError(problems)
    return graph
