"""Built-in service functions.

Each returns a :class:`ServiceResponse`. The arithmetic evaluator is a
proper recursive-descent parser (no ``eval``), and web search goes
through a pluggable engine client so tests can run against a static
engine with no network.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Any, Sequence

from .response import ServiceExecStatus, ServiceResponse
from .toolkit import service

# ---------------------------------------------------------------------------
# files


@service(
    description="Read a UTF-8 text file and return its full contents.",
    params={"path": {"type": "string", "description": "Path of the file to read."}},
)
def read_text_file(path: str) -> ServiceResponse:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        return ServiceResponse(ServiceExecStatus.ERROR, f"cannot read {path}: {e}")
    return ServiceResponse(ServiceExecStatus.SUCCESS, text)


@service(
    description="Write text to a UTF-8 file, creating parent directories.",
    params={
        "path": {"type": "string", "description": "Destination file path."},
        "text": {"type": "string", "description": "Text content to write."},
    },
)
def write_text_file(path: str, text: str) -> ServiceResponse:
    try:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text, encoding="utf-8")
    except OSError as e:
        return ServiceResponse(ServiceExecStatus.ERROR, f"cannot write {path}: {e}")
    return ServiceResponse(ServiceExecStatus.SUCCESS, f"wrote {len(text)} characters to {path}")


# ---------------------------------------------------------------------------
# arithmetic

_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?|\.\d+")


class _ExprParser:
    """Recursive-descent parser over + - * / parentheses and decimals."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> ValueError:
        return ValueError(f"{message} at position {self.pos} in {self.text!r}")

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str | None:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else None

    def parse(self) -> float:
        value = self.expr()
        self.skip_ws()
        if self.pos != len(self.text):
            raise self.error(f"unexpected character {self.text[self.pos]!r}")
        return value

    def expr(self) -> float:
        value = self.term()
        while (op := self.peek()) in ("+", "-"):
            self.pos += 1
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> float:
        value = self.factor()
        while (op := self.peek()) in ("*", "/"):
            self.pos += 1
            rhs = self.factor()
            if op == "*":
                value = value * rhs
            else:
                if rhs == 0:
                    raise self.error("division by zero")
                value = value / rhs
        return value

    def factor(self) -> float:
        ch = self.peek()
        if ch == "+":
            self.pos += 1
            return self.factor()
        if ch == "-":
            self.pos += 1
            return -self.factor()
        if ch == "(":
            self.pos += 1
            value = self.expr()
            if self.peek() != ")":
                raise self.error("missing closing parenthesis")
            self.pos += 1
            return value
        m = _NUMBER_RE.match(self.text, self.pos)
        if not m:
            raise self.error("expected a number or parenthesized expression")
        self.pos = m.end()
        return float(m.group(0))


def format_number(value: float) -> str:
    # Integer-valued results print without a decimal point.
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


@service(
    description="Evaluate an arithmetic expression with + - * /, parentheses, and decimals.",
    params={"expr": {"type": "string", "description": "Expression to evaluate, e.g. 2*(3+4)."}},
)
def evaluate_arithmetic(expr: str) -> ServiceResponse:
    try:
        value = _ExprParser(expr).parse()
    except ValueError as e:
        return ServiceResponse(ServiceExecStatus.ERROR, str(e))
    return ServiceResponse(ServiceExecStatus.SUCCESS, format_number(value))


# ---------------------------------------------------------------------------
# corpus search


@service(
    description="Search text files in a corpus directory by keyword overlap.",
    params={
        "query": {"type": "string", "description": "Keywords to look for."},
        "corpus_dir": {"type": "string", "description": "Directory of text files to scan."},
        "k": {"type": "integer", "description": "Maximum number of results."},
    },
)
def keyword_search_corpus(query: str, corpus_dir: str, k: int = 3) -> ServiceResponse:
    root = Path(corpus_dir)
    if not root.is_dir():
        return ServiceResponse(ServiceExecStatus.ERROR, f"corpus directory not found: {corpus_dir}")
    keywords = [w for w in query.lower().split() if w]
    scored: list[tuple[int, str, str]] = []
    for path in sorted(root.rglob("*.txt")):
        try:
            text = path.read_text(encoding="utf-8")
        except OSError:
            continue
        lower = text.lower()
        score = sum(lower.count(w) for w in keywords)
        if score > 0:
            scored.append((score, str(path), text[:200]))
    scored.sort(key=lambda row: (-row[0], row[1]))
    results = [{"path": p, "score": s, "snippet": snip} for s, p, snip in scored[: max(k, 0)]]
    return ServiceResponse(ServiceExecStatus.SUCCESS, results)


# ---------------------------------------------------------------------------
# web search


class SearchEngine:
    """Client interface for a web search engine."""

    def search(self, question: str, api_key: str | None, num_results: int) -> list[dict[str, str]]:
        raise NotImplementedError


class StaticSearchEngine(SearchEngine):
    """Offline engine answering from a fixed result table.

    ``results`` maps a query substring to its result list; ``default`` is
    returned when nothing matches. Deterministic, for tests and demos.
    """

    def __init__(
        self,
        results: dict[str, list[dict[str, str]]] | None = None,
        default: list[dict[str, str]] | None = None,
    ):
        self.results = dict(results or {})
        self.default = list(default or [])
        self.queries: list[str] = []

    def search(self, question: str, api_key: str | None, num_results: int) -> list[dict[str, str]]:
        self.queries.append(question)
        for needle, rows in self.results.items():
            if needle in question:
                return rows[:num_results]
        return self.default[:num_results]


class HttpSearchEngine(SearchEngine):
    """Engine client for JSON HTTP search endpoints.

    Expects ``GET base_url?q=...&num=...`` to return a JSON array of
    ``{"title", "url", "snippet"}`` rows.
    """

    def __init__(self, base_url: str):
        self.base_url = base_url

    def search(self, question: str, api_key: str | None, num_results: int) -> list[dict[str, str]]:
        import requests

        params = {"q": question, "num": num_results}
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        resp = requests.get(self.base_url, params=params, headers=headers, timeout=30)
        resp.raise_for_status()
        return list(resp.json())[:num_results]


_ENGINES: dict[str, SearchEngine] = {}


def register_search_engine(name: str, engine: SearchEngine) -> None:
    _ENGINES[name] = engine


def _resolve_engine(engine: "str | SearchEngine") -> SearchEngine | None:
    if isinstance(engine, SearchEngine):
        return engine
    return _ENGINES.get(engine)


@service(
    description="Search the web for a question and return result snippets.",
    params={"question": {"type": "string", "description": "The question to search for."}},
)
def web_search(
    question: str,
    engine: "str | SearchEngine" = "mock",
    api_key: str | None = None,
    num_results: int = 5,
) -> ServiceResponse:
    client = _resolve_engine(engine)
    if client is None:
        return ServiceResponse(
            ServiceExecStatus.ERROR,
            f"unknown search engine {engine!r}; registered: {sorted(_ENGINES)}",
        )
    try:
        rows = client.search(question, api_key, num_results)
    except Exception as e:
        return ServiceResponse(ServiceExecStatus.ERROR, f"search failed: {e}")
    return ServiceResponse(ServiceExecStatus.SUCCESS, rows)


BUILTIN_SERVICES = {
    fn.__name__: fn
    for fn in (read_text_file, write_text_file, evaluate_arithmetic, keyword_search_corpus, web_search)
}


def get_builtin_service(name: str):
    fn = BUILTIN_SERVICES.get(name)
    if fn is None:
        from ..errors import ValidationError

        raise ValidationError(f"unknown service function {name!r}; built-ins: {sorted(BUILTIN_SERVICES)}")
    return fn
