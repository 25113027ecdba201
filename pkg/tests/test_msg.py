from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agentmesh.errors import DeserializationError, ValidationError
from agentmesh.msg import (
    Msg,
    PlaceholderMsg,
    canonical_json,
    deserialize_msg,
    serialize_msg,
    serialize_transcript,
)


def test_basic_construction_defaults():
    m = Msg("Alice", "Hello!")
    assert m.name == "Alice"
    assert m.content == "Hello!"
    assert m.role == "assistant"
    assert m.url is None
    assert m.metadata == {}
    assert len(m.id) == 32


def test_construction_with_url():
    m = Msg(name="Bob", content="How do you find this picture I captured yesterday?", url="https://xxx.png")
    assert m.url == "https://xxx.png"


def test_empty_content_accepted():
    assert Msg("host", "").content == ""


def test_empty_name_rejected():
    with pytest.raises(ValidationError):
        Msg("", "text")


def test_bad_role_rejected():
    with pytest.raises(ValidationError):
        Msg("a", "b", role="moderator")


def test_ids_unique_across_many():
    ids = {Msg("a", str(i)).id for i in range(500)}
    assert len(ids) == 500


def test_timestamps_non_decreasing():
    stamps = [Msg("a", str(i)).timestamp for i in range(200)]
    assert stamps == sorted(stamps)


def test_timestamp_format():
    ts = Msg("a", "x").timestamp
    assert ts.endswith("Z")
    assert len(ts) == len("2026-01-02T03:04:05.678Z")


def test_msg_immutable():
    m = Msg("a", "x")
    with pytest.raises(AttributeError):
        m.content = "y"


def test_serialize_roundtrip_identity():
    m = Msg("Alice", "Hello!", role="user", url="file:///x.png", metadata={"k": [1, 2]})
    again = deserialize_msg(serialize_msg(m))
    assert again == m
    assert serialize_msg(again) == serialize_msg(m)


def test_canonical_form_sorted_no_whitespace():
    s = serialize_msg(Msg("a", "b"))
    keys = list(json.loads(s))
    assert keys == sorted(keys)
    assert ": " not in s and ", " not in s


def test_deserialize_missing_name():
    with pytest.raises(DeserializationError, match="missing field: name"):
        deserialize_msg("{}")


def test_deserialize_malformed_role():
    m = Msg("a", "b").to_dict()
    m["role"] = "overlord"
    with pytest.raises(DeserializationError, match="role"):
        deserialize_msg(json.dumps(m))


def test_placeholder_wire_roundtrip():
    p = PlaceholderMsg("task-1", "127.0.0.1", 8700)
    wire = serialize_msg(p)
    data = json.loads(wire)
    assert data["__placeholder__"] is True
    again = deserialize_msg(wire)
    assert isinstance(again, PlaceholderMsg)
    assert again == p


def test_placeholder_port_validation():
    with pytest.raises(ValidationError):
        PlaceholderMsg("t", "h", 0)
    with pytest.raises(ValidationError):
        PlaceholderMsg("t", "h", 70000)


def test_placeholder_never_mistaken_for_msg():
    wire = serialize_msg(PlaceholderMsg("t", "h", 1))
    assert isinstance(deserialize_msg(wire), PlaceholderMsg)


_meta_values = st.recursive(
    st.none() | st.booleans() | st.integers(-1000, 1000) | st.text(max_size=8),
    lambda children: st.lists(children, max_size=3) | st.dictionaries(st.text(max_size=4), children, max_size=3),
    max_leaves=6,
)


@settings(max_examples=100, deadline=None)
@given(
    name=st.text(min_size=1, max_size=12),
    content=st.text(max_size=64),
    role=st.sampled_from(["system", "user", "assistant"]),
    url=st.none() | st.text(min_size=1, max_size=24),
    metadata=st.dictionaries(st.text(max_size=6), _meta_values, max_size=4),
)
def test_roundtrip_property(name, content, role, url, metadata):
    m = Msg(name, content, role=role, url=url, metadata=metadata)
    assert deserialize_msg(serialize_msg(m)) == m


def test_transcript_serialization_stable_across_runs():
    def run():
        return [Msg("a", "one"), Msg("b", "two", role="user")]

    assert serialize_transcript(run()) == serialize_transcript(run())


def test_canonical_json_helper():
    assert canonical_json({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'
