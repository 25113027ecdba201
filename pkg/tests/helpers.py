"""Shared test utilities: scripted configs, deterministic agents, the
werewolf fixture, an in-thread studio server, and timing helpers."""

from __future__ import annotations

import threading
import time
from typing import Sequence

from agentmesh.agents import DialogAgent, DictDialogAgent
from agentmesh.agents.base import AgentBase
from agentmesh.models import get_backend, register_configs
from agentmesh.msg import Msg, as_msg


def rule(respond: str, when: str | None = None, fail: int = 0, delay: int = 0, repeat: bool = False) -> dict:
    out: dict = {"respond": respond}
    if when is not None:
        out["when_contains"] = when
    if fail:
        out["fail_times"] = fail
    if delay:
        out["delay_ms"] = delay
    if repeat:
        out["repeat"] = True
    return out


def scripted_config(name: str, rules: Sequence[dict], price: float | None = None) -> dict:
    cfg: dict = {"config_name": name, "model_type": "scripted", "script": list(rules)}
    if price is not None:
        cfg["price_per_1k_tokens"] = price
    return cfg


def make_scripted_backend(name: str, rules: Sequence[dict], price: float | None = None):
    register_configs([scripted_config(name, rules, price)])
    return get_backend(name)


def scripted_dialog(agent_name: str, config_name: str, responses: Sequence[str], sys_prompt: str = "") -> DialogAgent:
    register_configs([scripted_config(config_name, [rule(r) for r in responses])])
    return DialogAgent(agent_name, sys_prompt=sys_prompt, model_config_name=config_name)


class CounterAgent(AgentBase):
    """Deterministic model-free agent whose reply encodes its memory size.

    Sensitive to exactly which messages it has observed, which makes it a
    sharp probe for delivery semantics in hubs and pipelines.
    """

    def reply(self, x=None, **kwargs) -> Msg:
        if x is not None:
            self.observe(x)
        out = Msg(self.name, f"{self.name}:{len(self.memory)}")
        self.observe(out)
        return out


# ---------------------------------------------------------------------------
# werewolf fixture


def _wolf_json(speak: str, agreement: str) -> str:
    return f'{{"thought": "t", "speak": "{speak}", "agreement": "{agreement}"}}'


def _plain_json(speak: str, **extra: str) -> str:
    fields = "".join(f', "{k}": "{v}"' for k, v in extra.items())
    return f'{{"thought": "t", "speak": "{speak}"{fields}}}'


def werewolf_scripts() -> dict[str, list[dict]]:
    """Per-player response scripts for one deterministic game round.

    Night: wolves agree on Player3 and vote it out; the witch holds her
    potion; the seer checks Player1. Day: three votes against Player2
    beat two against Player5, so Player2 is voted out. Some replies are
    fenced or miss a closing brace to exercise the repair path in flow.
    """
    return {
        "Player1": [
            rule(_wolf_json("I think we should consider Player3.", "false")),
            rule("```json\n" + _wolf_json("Player3", "true") + "\n```"),
            rule(_wolf_json("I worry about Player5, they are too quiet.", "true")),
            rule(_wolf_json("Player5", "true")),
        ],
        "Player2": [
            # missing closing brace on purpose: the repair rules fix it
            rule('{"thought": "t", "speak": "Agreed, Player3 is dangerous.", "agreement": "true"'),
            rule(_wolf_json("Player3", "true")),
            rule(_wolf_json("I also find Player5 suspicious.", "true")),
            rule(_wolf_json("Player5", "true")),
        ],
        "Player3": [],
        "Player4": [
            rule(_plain_json("Player1 and Player2 agreed very quickly last night.")),
            rule(_plain_json("Player2")),
        ],
        "Player5": [
            rule(_plain_json("Player1")),
            rule(_plain_json("My checks point at Player2.")),
            rule(_plain_json("Player2")),
        ],
        "Player6": [
            rule(_plain_json("I will not use my potion tonight.", resurrect="false")),
            rule(_plain_json("I agree with Player4 about the wolves.")),
            rule(_plain_json("Player2")),
        ],
    }


WOLF_KEYS = ["thought", "speak", "agreement"]
VILLAGER_KEYS = ["thought", "speak"]


def make_werewolf_players(config_prefix: str) -> dict[str, DictDialogAgent]:
    """Instantiate the six scripted players; configs prefixed per run so
    local and distributed twins consume independent scripts."""
    players: dict[str, DictDialogAgent] = {}
    for name, script in werewolf_scripts().items():
        config_name = f"{config_prefix}-{name}"
        register_configs([scripted_config(config_name, script)])
        required = WOLF_KEYS if name in ("Player1", "Player2") else VILLAGER_KEYS
        players[name] = DictDialogAgent(
            name,
            sys_prompt=f"You are {name} in a werewolf game.",
            model_config_name=config_name,
            required_keys=required,
        )
    return players


def name_content(transcript) -> list[tuple[str, str]]:
    return [(as_msg(m).name, as_msg(m).content) for m in transcript]


# ---------------------------------------------------------------------------
# studio server in a thread


class StudioThread:
    """Real uvicorn server for tests that need live HTTP + WebSocket."""

    def __init__(self, static_dir=None):
        import uvicorn

        from agentmesh.studio import create_app

        self.app = create_app(static_dir=static_dir)
        self._config = uvicorn.Config(self.app, host="127.0.0.1", port=0, log_level="error")
        self._server = uvicorn.Server(self._config)
        self._thread = threading.Thread(target=self._server.run, daemon=True)

    def start(self) -> "StudioThread":
        self._thread.start()
        deadline = time.monotonic() + 15
        while time.monotonic() < deadline:
            if self._server.started and self._server.servers:
                return self
            time.sleep(0.02)
        raise RuntimeError("studio server did not start")

    @property
    def port(self) -> int:
        return self._server.servers[0].sockets[0].getsockname()[1]

    @property
    def url(self) -> str:
        return f"http://127.0.0.1:{self.port}"

    def stop(self) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=10)

    def __enter__(self) -> "StudioThread":
        return self.start()

    def __exit__(self, exc_type, exc, tb) -> None:
        self.stop()


def timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start
