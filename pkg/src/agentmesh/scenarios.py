"""Example application flows built from the library's pieces.

These drivers mirror the classic multi-agent shapes: a user/assistant
conversation loop, a group chat with @-mentions, a six-player werewolf
round, a copilot that routes questions to knowledge agents, and a web
search fan-out. They are ordinary library code (the test suite and the
studio demo both run them) and double as usage examples: every driver
works identically whether the agents passed in are local instances or
remote proxies.
"""

from __future__ import annotations

from collections import Counter
from typing import Mapping, Sequence

from .agents import filter_agents
from .agents.base import AgentBase
from .errors import InputTimeoutError
from .msg import AnyMsg, Msg, as_msg
from .pipelines import msghub
from .services.builtin import SearchEngine, web_search


def basic_conversation(assistant, user, max_rounds: int = 100) -> list[Msg]:
    """Assistant/user loop that ends when the user types ``exit``."""
    transcript: list[AnyMsg] = []
    x: AnyMsg | None = None
    for _ in range(max_rounds):
        if not (x is None or as_msg(x).content != "exit"):
            break
        x = assistant(x)
        transcript.append(x)
        x = user(x)
        transcript.append(x)
    return [as_msg(m) for m in transcript]


def group_chat(
    user,
    npc_agents: Sequence,
    announcement: AnyMsg | None = None,
    user_timeout: float | None = None,
    max_turns: int = 100,
) -> list[Msg]:
    """Group conversation with @-mentions.

    The user speaks first each turn (a timeout counts as silence). If the
    message mentions agents, they respond next in mention order; otherwise
    the floor rotates round-robin. ``exit`` ends the chat.
    """
    transcript: list[AnyMsg] = []
    speak_list: list = []
    rotation = 0
    agents = list(npc_agents) + [user]
    with msghub(agents, announcement=announcement):
        for _ in range(max_turns):
            try:
                x = user(timeout=user_timeout)
                transcript.append(x)
            except InputTimeoutError:
                x = Msg(user.name, "", role="user")
            if as_msg(x).content == "exit":
                break
            speak_list += filter_agents(as_msg(x).content, npc_agents)
            if speak_list:
                next_agent = speak_list.pop(0)
            else:
                next_agent = npc_agents[rotation % len(npc_agents)]
                rotation += 1
            reply = next_agent()
            transcript.append(reply)
            speak_list += filter_agents(as_msg(reply).content, npc_agents)
    return [as_msg(m) for m in transcript]


def _majority(votes: Sequence[str]) -> str:
    counts = Counter(votes)
    top = max(counts.values())
    # Deterministic tie-break: alphabetical among the most-voted.
    return sorted(name for name, c in counts.items() if c == top)[0]


def _is_true(value) -> bool:
    return str(value).strip().lower() == "true"


def werewolf_round(
    players: Mapping[str, object],
    moderator_name: str = "Moderator",
    max_discussion_rounds: int = 2,
) -> list[Msg]:
    """One night-and-day round of the six-player werewolf game.

    ``players`` maps Player1..Player6 to their agents: Player1/Player2 are
    the werewolves, Player5 the seer, Player6 the witch. Structured
    replies carry ``speak`` plus role keys (``agreement`` for wolves,
    ``resurrect`` for the witch). Returns the full transcript, moderator
    lines included, with every deferred reply resolved.
    """
    transcript: list[AnyMsg] = []

    def mod(content: str, hub=None) -> Msg:
        m = Msg(moderator_name, content)
        transcript.append(m)
        if hub is not None:
            hub.broadcast(m)
        return m

    wolves = [players["Player1"], players["Player2"]]
    witch = players["Player6"]
    seer = players["Player5"]

    # Night: werewolves confer until they agree, then vote.
    night_hint = Msg(
        moderator_name,
        "Player1 and Player2, you are werewolves. Discuss and reach an agreement "
        "on which player to eliminate.",
    )
    transcript.append(night_hint)
    with msghub(wolves, announcement=night_hint) as hub:
        for _ in range(max_discussion_rounds):
            x = None
            for wolf in wolves:
                x = wolf()
                transcript.append(x)
            if _is_true(as_msg(x).metadata.get("agreement")):
                break
        mod("Which player do you vote to kill?", hub=hub)
        votes = []
        for wolf in wolves:
            v = wolf()
            transcript.append(v)
            votes.append(as_msg(v).content)
    victim = _majority(votes)
    mod(f"The player with the most votes is {victim}.")

    # Witch decides on resurrection; seer checks a player.
    witch_reply = witch(
        mod(
            f"Player6, you're witch. Tonight {victim} is eliminated. "
            f"Would you like to resurrect {victim}?"
        )
    )
    transcript.append(witch_reply)
    resurrected = _is_true(as_msg(witch_reply).metadata.get("resurrect"))

    seer_reply = seer(mod("Player5, you're seer. Which player would you like to check tonight?"))
    transcript.append(seer_reply)
    checked = as_msg(seer_reply).content
    checked_role = "werewolf" if checked in ("Player1", "Player2") else "villager"
    mod(f"Okay, the role of {checked} is {checked_role}.")

    eliminated = [] if resurrected else [victim]
    if eliminated:
        mod(f"The day is coming. Last night, the following player(s) has been eliminated: {victim}.")
    else:
        mod("The day is coming. Last night is peaceful, no player is eliminated.")

    alive = [(name, agent) for name, agent in players.items() if name not in eliminated]
    alive_names = ", ".join(name for name, _ in alive)

    # Day: open discussion, then a vote among all alive players.
    day_hint = Msg(
        moderator_name,
        f"Now the alive players are {alive_names}. Based on the situation, "
        "what do you want to say to others?",
    )
    transcript.append(day_hint)
    with msghub([agent for _, agent in alive], announcement=day_hint) as hub:
        for _, agent in alive:
            r = agent()
            transcript.append(r)
        mod(
            "It's time to vote one player among the alive players, please cast "
            "your vote on who you believe is a werewolf.",
            hub=hub,
        )
        day_votes = []
        for _, agent in alive:
            v = agent()
            transcript.append(v)
            day_votes.append(as_msg(v).content)
    voted_out = _majority(day_votes)
    mod(f"{voted_out} has been voted out.")
    mod("The game goes on.")
    return [as_msg(m) for m in transcript]


def rag_copilot_turn(
    question: str,
    guide,
    rag_agents: Sequence,
    user_name: str = "User",
) -> list[Msg]:
    """One copilot turn: route a question to the right knowledge agent.

    Agents mentioned in the question answer directly; otherwise the guide
    agent decides whom to call and the mentioned agents respond in turn.
    """
    x = Msg(user_name, question, role="user")
    transcript: list[AnyMsg] = [x]
    speak_list = filter_agents(x.content, rag_agents)
    if not speak_list:
        guide_response = guide(x)
        transcript.append(guide_response)
        speak_list = filter_agents(as_msg(guide_response).content, rag_agents)
    for agent in speak_list:
        transcript.append(agent(x))
    return [as_msg(m) for m in transcript]


class SearcherAgent(AgentBase):
    """Turns a question into search-result pages via the web search service."""

    def __init__(
        self,
        name: str,
        engine: SearchEngine | str = "mock",
        api_key: str | None = None,
        result_num: int = 3,
    ):
        super().__init__(name)
        self.engine = engine
        self.api_key = api_key
        self.result_num = result_num

    def reply(self, x: AnyMsg | None = None, **kwargs) -> Msg:
        if x is None:
            raise ValueError("searcher needs a question message")
        self.observe(x)
        resp = web_search(
            question=as_msg(x).content,
            engine=self.engine,
            api_key=self.api_key,
            num_results=self.result_num,
        )
        if not resp.ok:
            raise RuntimeError(str(resp.content))
        pages = list(resp.content)
        out = Msg(self.name, f"found {len(pages)} results", metadata={"pages": pages})
        self.observe(out)
        return out


def search_fanout(question: str, searcher, answerers: Sequence) -> list[Msg]:
    """Fan a question's search results out to one answerer per page.

    All answerer calls are issued before any result is awaited, so remote
    answerers overlap their work; the returned answers are resolved.
    """
    pages_msg = searcher(Msg("User", question, role="user"))
    pages = as_msg(pages_msg).metadata.get("pages", [])
    results = []
    for page, worker in zip(pages, answerers):
        results.append(
            worker(Msg("Searcher", f"{page.get('title', '')}: {page.get('snippet', '')}", role="user"))
        )
    return [as_msg(r) for r in results]
