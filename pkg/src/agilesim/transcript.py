"""Messages, transcripts, memory windows and the clocks that timestamp them."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Any, Protocol, Sequence, Union

from agilesim import canonical as cj
from agilesim.errors import BadEnumValue, ConfigError
from agilesim.tools import ToolCallDirective, ToolResult


@dataclass(frozen=True)
class ToolCall:
    directive: ToolCallDirective
    result: ToolResult


@dataclass(frozen=True)
class Message:
    index: int
    agent_name: str
    content: str
    timestamp: datetime
    tool_trace: tuple[ToolCall, ...] = ()


Transcript = Sequence[Message]


def format_ts(ts: datetime) -> str:
    """ISO-8601 UTC with millisecond precision, e.g. ``2024-01-01T00:00:00.000Z``."""
    ts = ts.astimezone(timezone.utc)
    return ts.strftime("%Y-%m-%dT%H:%M:%S.") + f"{ts.microsecond // 1000:03d}Z"


def parse_ts(text: str) -> datetime:
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    return datetime.fromisoformat(text).astimezone(timezone.utc)


def message_to_dict(msg: Message) -> dict[str, Any]:
    return {
        "index": msg.index,
        "agent_name": msg.agent_name,
        "content": msg.content,
        "timestamp": format_ts(msg.timestamp),
        "tool_trace": [
            {
                "tool": call.directive.tool_name,
                "args": dict(call.directive.args),
                "ok": call.result.ok,
                "content": call.result.content,
            }
            for call in msg.tool_trace
        ],
    }


def message_from_dict(obj: Any, path: str = "") -> Message:
    obj = cj.expect_object(obj, path)
    trace = []
    for i, raw in enumerate(cj.expect_list(cj.get(obj, "tool_trace", path, []), "tool_trace")):
        p = cj.join(cj.join(path, "tool_trace"), i)
        raw = cj.expect_object(raw, p)
        trace.append(
            ToolCall(
                ToolCallDirective(
                    cj.expect_str(cj.get(raw, "tool", p), p),
                    cj.expect_str_map(cj.get(raw, "args", p, {}), p),
                ),
                ToolResult(
                    cj.expect_bool(cj.get(raw, "ok", p), p),
                    cj.expect_str(cj.get(raw, "content", p), p),
                ),
            )
        )
    return Message(
        index=cj.expect_int(cj.get(obj, "index", path), cj.join(path, "index")),
        agent_name=cj.expect_str(cj.get(obj, "agent_name", path), cj.join(path, "agent_name")),
        content=cj.expect_str(cj.get(obj, "content", path), cj.join(path, "content")),
        timestamp=parse_ts(cj.expect_str(cj.get(obj, "timestamp", path), cj.join(path, "timestamp"))),
        tool_trace=tuple(trace),
    )


def transcript_to_json(transcript: Transcript) -> str:
    return cj.canonical_json([message_to_dict(m) for m in transcript])


def transcript_from_json(text: str | bytes) -> list[Message]:
    items = cj.expect_list(cj.loads(text), "")
    return [message_from_dict(item, f"[{i}]") for i, item in enumerate(items)]


# --- memory -------------------------------------------------------------------


@dataclass(frozen=True)
class FullMemory:
    def to_dict(self) -> dict[str, Any]:
        return {"kind": "full"}


@dataclass(frozen=True)
class LastK:
    k: int

    def __post_init__(self) -> None:
        if isinstance(self.k, bool) or not isinstance(self.k, int) or self.k < 1:
            raise ValueError(f"LastK needs k >= 1, got {self.k!r}")

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "last_k", "k": self.k}


MemoryPolicy = Union[FullMemory, LastK]


def apply_memory_policy(policy: MemoryPolicy, transcript: Transcript) -> list[Message]:
    if isinstance(policy, LastK):
        return list(transcript[-policy.k :]) if transcript else []
    return list(transcript)


def memory_from_json(value: Any, path: str = "memory") -> MemoryPolicy:
    """Accepts ``{"kind": "full"}``, ``{"kind": "last_k", "k": 3}``, ``"full"`` or ``"last:3"``."""
    if isinstance(value, str):
        if value == "full":
            return FullMemory()
        if value.startswith("last:"):
            try:
                return LastK(int(value[5:]))
            except ValueError:
                pass
        raise BadEnumValue(path, value, ("full", "last:K"))
    obj = cj.expect_object(value, path)
    kind = cj.expect_str(cj.get(obj, "kind", path), cj.join(path, "kind"))
    if kind == "full":
        return FullMemory()
    if kind == "last_k":
        k = cj.expect_int(cj.get(obj, "k", path), cj.join(path, "k"))
        if k < 1:
            raise ConfigError(f"{path}.k must be >= 1, got {k}")
        return LastK(k)
    raise BadEnumValue(cj.join(path, "kind"), kind, ("full", "last_k"))


# --- clocks -------------------------------------------------------------------


class Clock(Protocol):
    def now(self) -> datetime: ...


class SystemClock:
    def now(self) -> datetime:
        return datetime.now(timezone.utc)


class FixedClock:
    """Deterministic clock: starts at ``epoch`` and advances ``tick`` per reading."""

    def __init__(self, epoch: datetime | float | int = 0, tick: timedelta = timedelta(seconds=1)):
        if not isinstance(epoch, datetime):
            epoch = datetime.fromtimestamp(epoch, tz=timezone.utc)
        self.epoch = epoch.astimezone(timezone.utc)
        self.tick = tick
        self._n = 0
        self._lock = threading.Lock()

    def now(self) -> datetime:
        with self._lock:
            ts = self.epoch + self._n * self.tick
            self._n += 1
        return ts
