"""Workflow DAG engine: load, validate, run, and compile graphs."""

from .compile import compile_workflow
from .graph import (
    NODE_KINDS,
    PIPELINE_KINDS,
    WorkflowGraph,
    WorkflowNode,
    load_workflow,
    topological_order,
    validate_graph,
)
from .run import call_service, content_predicate, content_selector, register_model_config, run_workflow

__all__ = [
    "compile_workflow",
    "NODE_KINDS",
    "PIPELINE_KINDS",
    "WorkflowGraph",
    "WorkflowNode",
    "load_workflow",
    "topological_order",
    "validate_graph",
    "call_service",
    "content_predicate",
    "content_selector",
    "register_model_config",
    "run_workflow",
]
