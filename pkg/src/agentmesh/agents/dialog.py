"""Model-backed dialog agents.

``DialogAgent`` is the general conversational agent: its role is set by
the system prompt and its replies come straight from the model.
``DictDialogAgent`` expects structured key-value replies, parses them
through the JSON repair rules, and keeps the full parsed map in message
metadata so application keys survive transport. ``TextToImageAgent``
routes generated payloads through the artifact store and attaches only a
URL to its reply.
"""

from __future__ import annotations

from typing import Any, Sequence

from ..errors import AccessibilityError, AgentError, ParseError, StructuredResponseError
from ..models import invoke, invoke_with_parsing, parse_json_block
from ..msg import AnyMsg, Msg, as_msg
from .base import AgentBase
from .prompting import format_demo_block, generate_sys_prompt, select_demos


class DialogAgent(AgentBase):
    """General dialog agent whose persona is defined by ``sys_prompt``.

    With ``auto_sys_prompt`` the given prompt is treated as a plain
    description and elaborated into a full system prompt by the model at
    construction time. With ``enable_icl`` the agent prepends selected
    demonstrations to its system prompt on every reply.
    """

    def __init__(
        self,
        name: str,
        sys_prompt: str = "",
        model_config_name: str | None = None,
        max_retries: int = 3,
        auto_sys_prompt: bool = False,
        enable_icl: bool = False,
        demos: Sequence | None = None,
        matching_approach: str = "random",
        icl_k: int = 1,
        icl_seed: int = 0,
    ):
        super().__init__(name, sys_prompt, model_config_name)
        self.max_retries = max_retries
        self.enable_icl = enable_icl
        self.demos = list(demos or [])
        self.matching_approach = matching_approach
        self.icl_k = icl_k
        self.icl_seed = icl_seed
        if auto_sys_prompt:
            self.sys_prompt = generate_sys_prompt(
                sys_prompt, self.backend, max_retries=max_retries
            )

    def _system_text(self, query: str) -> str:
        text = self.sys_prompt
        if self.enable_icl and self.demos:
            picked = select_demos(
                self.demos,
                query,
                approach=self.matching_approach,
                k=min(self.icl_k, len(self.demos)),
                seed=self.icl_seed,
            )
            text = text + "\n\n" + format_demo_block(picked) if text else format_demo_block(picked)
        return text

    def _build_prompt(self, query: str) -> list[Msg]:
        return [Msg("system", self._system_text(query), role="system")] + list(self.memory)

    def reply(self, x: AnyMsg | None = None, **kwargs) -> Msg:
        if x is not None:
            self.observe(x)
        query = as_msg(x).content if x is not None else ""
        prompt = self._build_prompt(query)
        try:
            resp = invoke(self.backend, prompt, max_retries=self.max_retries)
        except AccessibilityError as e:
            raise AgentError(
                f"agent {self.name!r} could not reach its model: {e}",
                agent_name=self.name,
                cause=e,
            ) from e
        out = Msg(self.name, resp.text)
        self.observe(out)
        return out


class DictDialogAgent(DialogAgent):
    """Dialog agent that responds as a structured key-value mapping.

    The model's output is parsed through the repair rules; the parsed map
    lands in ``Msg.metadata`` and its ``speak`` entry (when present)
    becomes the message content. Parsing faults re-invoke the model, and
    after the retry budget the failure surfaces as a structured-response
    error listing the missing keys.
    """

    def __init__(
        self,
        name: str,
        sys_prompt: str = "",
        model_config_name: str | None = None,
        max_retries: int = 3,
        required_keys: Sequence[str] | None = None,
        **dialog_kwargs,
    ):
        super().__init__(name, sys_prompt, model_config_name, max_retries, **dialog_kwargs)
        self.required_keys = list(required_keys or [])

    def reply(self, x: AnyMsg | None = None, required_keys: Sequence[str] | None = None, **kwargs) -> Msg:
        keys = list(required_keys) if required_keys is not None else self.required_keys
        if x is not None:
            self.observe(x)
        query = as_msg(x).content if x is not None else ""
        prompt = self._build_prompt(query)

        def parse(resp) -> dict[str, Any]:
            data = parse_json_block(resp.text)
            missing = [k for k in keys if k not in data]
            if missing:
                raise StructuredResponseError(
                    f"structured reply from {self.name!r} missing required keys: "
                    + ", ".join(missing),
                    missing_keys=missing,
                )
            return data

        def give_up(last_resp):
            try:
                data = parse_json_block(last_resp.text)
            except ParseError as e:
                raise StructuredResponseError(
                    f"structured reply from {self.name!r} unparseable after "
                    f"{1 + self.max_retries} attempts: {e}",
                    missing_keys=keys,
                ) from e
            missing = [k for k in keys if k not in data]
            raise StructuredResponseError(
                f"structured reply from {self.name!r} missing required keys after "
                f"{1 + self.max_retries} attempts: " + ", ".join(missing),
                missing_keys=missing,
            )

        data = invoke_with_parsing(
            self.backend,
            prompt,
            parse,
            fault_handler=give_up,
            max_retries=self.max_retries,
        )
        speak = data.get("speak", "")
        content = speak if isinstance(speak, str) else str(speak)
        out = Msg(self.name, content, metadata=data)
        self.observe(out)
        return out


class TextToImageAgent(AgentBase):
    """Agent that turns prompts into stored image artifacts.

    The model's payload is saved through the file manager and only the
    resulting local URL travels in the reply, keeping message size
    independent of artifact size. Image quality is the model's concern,
    not this plumbing's.
    """

    def __init__(
        self,
        name: str,
        sys_prompt: str = "",
        model_config_name: str | None = None,
        max_retries: int = 3,
        extension: str = ".png",
    ):
        super().__init__(name, sys_prompt, model_config_name)
        self.max_retries = max_retries
        self.extension = extension

    def reply(self, x: AnyMsg | None = None, **kwargs) -> Msg:
        from ..monitor import save_artifact

        if x is not None:
            self.observe(x)
        prompt = [Msg("system", self.sys_prompt, role="system")] + list(self.memory)
        resp = invoke(self.backend, prompt, max_retries=self.max_retries)
        payload = resp.raw.get("image_bytes") if isinstance(resp.raw, dict) else None
        if payload is None:
            payload = resp.text.encode("utf-8")
        url = save_artifact(payload, self.extension)
        out = Msg(self.name, f"image generated for: {as_msg(x).content if x else ''}", url=url)
        self.observe(out)
        return out
