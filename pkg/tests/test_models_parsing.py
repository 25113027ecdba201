from __future__ import annotations

import json
import random
import string

import pytest

from agentmesh.errors import ParseError, RuleResolvableError
from agentmesh.models import parse_fenced, parse_json_block, parse_tagged, repair_json
from agentmesh.msg import canonical_json


def test_completes_unclosed_brace():
    assert repair_json('{"a":1') == {"a": 1}


def test_extracts_from_fence():
    assert repair_json('reply: ```json\n{"x":2}\n``` thanks') == {"x": 2}


def test_untagged_fence():
    assert repair_json('```\n{"x": [1, 2]}\n```') == {"x": [1, 2]}


def test_trailing_comma_object():
    assert repair_json('{"a": 1,}') == {"a": 1}


def test_trailing_comma_array():
    assert repair_json("[1, 2, ]") == [1, 2]


def test_unclosed_nested():
    assert repair_json('{"a": {"b": [1, 2') == {"a": {"b": [1, 2]}}


def test_prose_wrapped_object():
    assert repair_json('The answer is {"k": "v"} as requested.') == {"k": "v"}


def test_unterminated_string_closed():
    assert repair_json('{"a": "oops') == {"a": "oops"}


def test_mismatched_closer_rejected():
    with pytest.raises(RuleResolvableError) as exc:
        repair_json('{"a":[1,2,}')
    assert exc.value.text  # carries the post-repair text


def test_valid_json_returned_unchanged():
    for text in ('{"a": 1}', "[1, 2]", '"str"', "42", "true", "null"):
        assert repair_json(text) == json.loads(text)


def test_string_content_with_braces_untouched():
    src = '{"code": "if (x) { return [1,2]; }"}'
    assert repair_json(src) == json.loads(src)


def test_comma_inside_string_kept():
    src = '{"a": "1,}", "b": 2'
    assert repair_json(src) == {"a": "1,}", "b": 2}


def _random_json(rng: random.Random, depth: int = 0):
    choices = ["int", "str", "bool", "null", "float"]
    if depth < 3:
        choices += ["obj", "arr", "obj", "arr"]
    kind = rng.choice(choices)
    if kind == "int":
        return rng.randint(-10_000, 10_000)
    if kind == "float":
        return round(rng.uniform(-100, 100), 4)
    if kind == "str":
        alphabet = string.ascii_letters + string.digits + " {}[],:\"'\\"
        return "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))
    if kind == "bool":
        return rng.choice([True, False])
    if kind == "null":
        return None
    if kind == "obj":
        return {
            f"k{i}_{rng.randint(0, 99)}": _random_json(rng, depth + 1)
            for i in range(rng.randint(0, 4))
        }
    return [_random_json(rng, depth + 1) for _ in range(rng.randint(0, 4))]


def broken_fixtures() -> list[tuple[str, object]]:
    """30 fixtures over the three rule-covered classes, expected values
    computed from the intact source before breaking it."""
    rng = random.Random(20240817)
    fixtures: list[tuple[str, object]] = []
    for i in range(10):  # unclosed braces/brackets
        value = {"seq": i, "items": list(range(i % 4)), "tag": f"b{i}"}
        text = json.dumps(value)
        cut = text.rstrip("}]")
        fixtures.append((cut, value))
    for i in range(10):  # fenced extraction
        value = {"seq": i, "nested": {"ok": True}}
        fixtures.append((f"Sure, here you go:\n```json\n{json.dumps(value)}\n```\nDone.", value))
    for i in range(10):  # trailing commas
        value = {"seq": i, "xs": [1, 2, 3]}
        text = json.dumps(value).replace("]", ",]").replace("}", ",}")
        fixtures.append((text, value))
    assert len(fixtures) == 30
    return fixtures


def test_broken_corpus_repaired():
    for text, expected in broken_fixtures():
        assert repair_json(text) == expected, text


def test_valid_corpus_noop():
    rng = random.Random(99)
    for _ in range(100):
        value = _random_json(rng)
        text = json.dumps(value)
        assert repair_json(text) == value


def test_repair_idempotent_on_own_output():
    for text, _ in broken_fixtures():
        once = repair_json(text)
        assert repair_json(canonical_json(once)) == once


# -- fenced / tagged / json-block parsers ------------------------------------


def test_parse_fenced_first_block():
    text = "a\n```python\nx = 1\n```\nb\n```json\n{}\n```"
    assert parse_fenced(text) == "x = 1"
    assert parse_fenced(text, "json") == "{}"


def test_parse_fenced_missing():
    with pytest.raises(ParseError, match="no fenced block"):
        parse_fenced("nothing here")
    with pytest.raises(ParseError, match="json"):
        parse_fenced("```python\nx\n```", "json")


def test_parse_json_block_plain_and_fenced():
    assert parse_json_block('{"thought": "t", "speak": "s"}') == {"thought": "t", "speak": "s"}
    assert parse_json_block('```json\n{"speak":"Player3"}\n```') == {"speak": "Player3"}


def test_parse_json_block_requires_object():
    with pytest.raises(ParseError, match="object"):
        parse_json_block("[1, 2]")


def test_parse_tagged():
    out = parse_tagged(
        "[thought]t[/thought][speak]s[/speak]",
        [("[thought]", "[/thought]"), ("[speak]", "[/speak]")],
    )
    assert out == {"thought": "t", "speak": "s"}


def test_parse_tagged_missing_lists_all():
    with pytest.raises(ParseError) as exc:
        parse_tagged("no tags", [("[a]", "[/a]"), ("[b]", "[/b]")])
    assert "a" in str(exc.value) and "b" in str(exc.value)
