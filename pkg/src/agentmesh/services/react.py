"""Reasoning-acting agents.

The loop alternates between a reasoning step (one model call over the
tool instructions, conversation memory, and the in-run history) and an
acting step (parse the response, execute the named tools). Parsing and
execution problems never abort the loop: they are rendered into a
detailed diagnostic the model sees on its next reasoning step. The loop
ends when the model calls the reserved ``finish`` tool or the iteration
budget runs out.
"""

from __future__ import annotations

from typing import Sequence

from ..agents.base import AgentBase
from ..errors import ReactIncompleteError, ToolCallFault
from ..models import invoke
from ..msg import AnyMsg, Msg
from .builtin import evaluate_arithmetic, read_text_file, write_text_file
from .response import ServiceResponse
from .toolkit import FINISH_TOOL, ServiceToolkit


def render_results(results: Sequence[ServiceResponse], names: Sequence[str]) -> str:
    lines = ["Tool results:"]
    for name, res in zip(names, results):
        lines.append(f"{name} -> {res.render()}")
    return "\n".join(lines)


def diagnostic_message(diagnostic: str) -> str:
    return (
        f"Your previous response could not be used: {diagnostic}\n"
        "Correct the problem and respond again in the required format."
    )


class ReActAgent(AgentBase):
    """An agent that reasons and uses tools to answer."""

    def __init__(
        self,
        name: str,
        model_config_name: str | None = None,
        service_toolkit: ServiceToolkit | None = None,
        sys_prompt: str = "You are a helpful agent that can use tools.",
        max_iters: int = 10,
        max_retries: int = 3,
        verbose: bool = False,
    ):
        super().__init__(name, sys_prompt, model_config_name)
        self.toolkit = service_toolkit or ServiceToolkit()
        self.max_iters = max_iters
        self.max_retries = max_retries
        self.verbose = verbose
        #: model-visible per-run history; exposed for inspection after a run
        self.last_history: list[Msg] = []

    def reply(self, x: AnyMsg | None = None, **kwargs) -> Msg:
        return react_run(self, x, self.max_iters)


def react_run(agent: ReActAgent, x: AnyMsg | None, max_iters: int) -> Msg:
    """Drive one reasoning-acting session to a final answer.

    Every iteration makes exactly one model call and appends exactly two
    history entries: the assistant's output, then the tool results or the
    diagnostic for a correctable fault. Exhausting ``max_iters`` raises
    with the full trace attached.
    """
    if x is not None:
        agent.observe(x)
    toolkit = agent.toolkit
    instructions = toolkit.tools_instruction() + "\n\n" + toolkit.calling_format_instruction()
    system_text = (agent.sys_prompt + "\n\n" + instructions).strip()
    history: list[Msg] = []
    agent.last_history = history
    for _ in range(max_iters):
        prompt = [Msg("system", system_text, role="system")] + list(agent.memory) + history
        resp = invoke(agent.backend, prompt, max_retries=agent.max_retries)
        history.append(Msg(agent.name, resp.text))
        try:
            call = toolkit.parse(resp.text)
        except ToolCallFault as fault:
            history.append(Msg("system", diagnostic_message(fault.diagnostic), role="system"))
            continue
        results: list[ServiceResponse] = []
        executed: list[str] = []
        final: Msg | None = None
        for fc in call.function:
            if fc.name == FINISH_TOOL:
                final = Msg(agent.name, str(fc.arguments.get("response", "")))
                break
            results.append(toolkit.execute_one(fc))
            executed.append(fc.name)
        if final is not None:
            agent.observe(final)
            return final
        history.append(Msg("system", render_results(results, executed), role="system"))
    raise ReactIncompleteError(
        f"agent {agent.name!r} did not finish within {max_iters} iterations",
        trace=history,
    )


class ProgrammerAgent(ReActAgent):
    """Tool-equipped agent for small computational tasks.

    A thin composition: a reasoning-acting loop over a default toolkit of
    arithmetic evaluation and text-file access.
    """

    def __init__(
        self,
        name: str,
        model_config_name: str | None = None,
        sys_prompt: str = "You are proficient at solving tasks with computation and files.",
        max_iters: int = 10,
        max_retries: int = 3,
        auto_sys_prompt: bool = False,
    ):
        toolkit = ServiceToolkit()
        toolkit.add(evaluate_arithmetic)
        toolkit.add(read_text_file)
        toolkit.add(write_text_file)
        super().__init__(
            name,
            model_config_name=model_config_name,
            service_toolkit=toolkit,
            sys_prompt=sys_prompt,
            max_iters=max_iters,
            max_retries=max_retries,
        )
        if auto_sys_prompt:
            from ..agents.prompting import generate_sys_prompt

            self.sys_prompt = generate_sys_prompt(sys_prompt, self.backend, max_retries=max_retries)
