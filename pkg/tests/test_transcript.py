from datetime import datetime, timedelta, timezone

import pytest

from agilesim.errors import BadEnumValue, ConfigError
from agilesim.tools import ToolCallDirective, ToolResult
from agilesim.transcript import (
    FixedClock,
    FullMemory,
    LastK,
    Message,
    ToolCall,
    apply_memory_policy,
    format_ts,
    memory_from_json,
    parse_ts,
    transcript_from_json,
    transcript_to_json,
)

from conftest import EPOCH, msgs


def test_memory_windows():
    five = msgs("0", "1", "2", "3", "4")
    assert [m.index for m in apply_memory_policy(LastK(3), five)] == [2, 3, 4]
    assert len(apply_memory_policy(LastK(3), five[:2])) == 2
    assert apply_memory_policy(FullMemory(), []) == []
    assert apply_memory_policy(FullMemory(), five) == five


def test_last_k_rejects_zero():
    with pytest.raises(ValueError):
        LastK(0)


@pytest.mark.parametrize(
    "raw, expected",
    [("full", FullMemory()), ("last:3", LastK(3)), ({"kind": "last_k", "k": 2}, LastK(2)), ({"kind": "full"}, FullMemory())],
)
def test_memory_from_json(raw, expected):
    assert memory_from_json(raw) == expected


@pytest.mark.parametrize("raw", ["last:x", "all", {"kind": "last_k", "k": 0}, {"kind": "window"}])
def test_memory_from_json_rejects(raw):
    with pytest.raises(ConfigError):
        memory_from_json(raw)


def test_timestamp_format():
    ts = datetime(2024, 3, 5, 7, 8, 9, 123456, tzinfo=timezone.utc)
    assert format_ts(ts) == "2024-03-05T07:08:09.123Z"
    assert parse_ts("2024-03-05T07:08:09.123Z") == ts.replace(microsecond=123000)


def test_fixed_clock_ticks():
    clock = FixedClock(1_700_000_000)
    a, b = clock.now(), clock.now()
    assert b - a == timedelta(seconds=1)
    assert format_ts(a) == "2023-11-14T22:13:20.000Z"


def test_transcript_json_round_trip():
    call = ToolCall(ToolCallDirective("search", {"q": "x"}), ToolResult(True, "RESULT[x]"))
    transcript = [Message(0, "A", "hi <<tool:search>>", EPOCH, (call,)), *msgs("a", "b")[1:]]
    text = transcript_to_json(transcript)
    assert transcript_from_json(text) == transcript
    assert transcript_to_json(transcript_from_json(text)) == text
