"""Chat-completion backends: remote HTTP, scripted, and fixture record/replay.

All backends expose ``complete(request) -> ChatResponse`` and ``describe()``,
the secrets-free descriptor stored in config snapshots.
"""

from __future__ import annotations

import logging
import os
import re
import tempfile
import threading
import time
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Protocol, Sequence

import httpx

from agilesim import canonical as cj
from agilesim.agent_config import SamplingParams
from agilesim.errors import (
    BackendError,
    BackendTimeout,
    FixtureIoError,
    FixtureMissing,
    HttpError,
    ScriptExhausted,
)
from agilesim.prompt_engine import ChatRole, RenderedMessage

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT_S = 60.0


class FinishReason(str, Enum):
    STOP = "stop"
    LENGTH = "length"
    TOOL_DIRECTIVE = "tool_directive"


@dataclass(frozen=True)
class ChatRequest:
    model_name: str
    messages: tuple[RenderedMessage, ...]
    sampling: SamplingParams
    # routing tag for scripted backends; not part of the fixture key
    agent_name: str = ""

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValueError("chat request needs at least one message")


@dataclass(frozen=True)
class ChatResponse:
    text: str
    finish_reason: FinishReason = FinishReason.STOP
    prompt_tokens: int = 0
    completion_tokens: int = 0
    # backend-level notices (e.g. deprecations); logged, never persisted in fixtures
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.text and self.finish_reason is not FinishReason.LENGTH:
            raise ValueError("empty response text is only allowed with finish_reason=length")


class Backend(Protocol):
    def complete(self, request: ChatRequest) -> ChatResponse: ...

    def describe(self) -> dict[str, Any]: ...


def complete(backend: Backend, request: ChatRequest) -> ChatResponse:
    return backend.complete(request)


# --- serialization ------------------------------------------------------------


def request_to_dict(request: ChatRequest) -> dict[str, Any]:
    s = request.sampling
    return {
        "model_name": request.model_name,
        "messages": [{"role": m.role.value, "content": m.content} for m in request.messages],
        "sampling": {
            "temperature": float(s.temperature),
            "max_tokens": s.max_tokens,
            "presence_penalty": float(s.presence_penalty),
            "frequency_penalty": float(s.frequency_penalty),
        },
    }


def fixture_key(request: ChatRequest) -> str:
    """SHA-256 hex digest of the canonical (model, messages, sampling) encoding."""
    return cj.digest(cj.canonical_json(request_to_dict(request)))


def response_to_dict(response: ChatResponse) -> dict[str, Any]:
    return {
        "text": response.text,
        "finish_reason": response.finish_reason.value,
        "usage": {"prompt": response.prompt_tokens, "completion": response.completion_tokens},
    }


def response_from_dict(obj: Any, path: str = "response") -> ChatResponse:
    obj = cj.expect_object(obj, path)
    usage = cj.expect_object(cj.get(obj, "usage", path, {}), cj.join(path, "usage"))
    return ChatResponse(
        text=cj.expect_str(cj.get(obj, "text", path), cj.join(path, "text")),
        finish_reason=cj.expect_enum(
            cj.get(obj, "finish_reason", path, "stop"), FinishReason, cj.join(path, "finish_reason")
        ),
        prompt_tokens=cj.expect_int(usage.get("prompt", 0), cj.join(path, "usage.prompt")),
        completion_tokens=cj.expect_int(usage.get("completion", 0), cj.join(path, "usage.completion")),
    )


def wire_body(request: ChatRequest) -> dict[str, Any]:
    s = request.sampling
    body: dict[str, Any] = {
        "model": request.model_name,
        "messages": [{"role": m.role.value, "content": m.content} for m in request.messages],
        "temperature": s.temperature,
        "presence_penalty": s.presence_penalty,
        "frequency_penalty": s.frequency_penalty,
    }
    if s.max_tokens is not None:
        body["max_tokens"] = s.max_tokens
    return body


# --- scripted -----------------------------------------------------------------


@dataclass(frozen=True)
class ScriptLine:
    text: str
    guard: str | None = None
    finish_reason: FinishReason = FinishReason.STOP
    warning: str | None = None


def _script_line(raw: Any, path: str) -> ScriptLine:
    if isinstance(raw, str):
        return ScriptLine(raw)
    obj = cj.expect_object(raw, path)
    guard = obj.get("guard")
    warning = obj.get("warning")
    return ScriptLine(
        text=cj.expect_str(cj.get(obj, "text", path), cj.join(path, "text")),
        guard=None if guard is None else cj.expect_str(guard, cj.join(path, "guard")),
        finish_reason=cj.expect_enum(
            obj.get("finish_reason", "stop"), FinishReason, cj.join(path, "finish_reason")
        ),
        warning=None if warning is None else cj.expect_str(warning, cj.join(path, "warning")),
    )


class ScriptedBackend:
    """Replies with authored lines keyed by (agent name, per-agent call count).

    A script is a mapping ``agent name -> [line, ...]`` where each line is a
    string or ``{"text", "guard"?, "finish_reason"?, "warning"?}``. A guard is a
    regular expression that must be found in the request's last message.
    Counters live on the instance, so every simulation needs its own.
    """

    def __init__(self, script: Mapping[str, Sequence[str | ScriptLine]]):
        self.script = {
            agent: tuple(ScriptLine(x) if isinstance(x, str) else x for x in lines)
            for agent, lines in script.items()
        }
        self._turns: dict[str, int] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_json(cls, obj: Any) -> "ScriptedBackend":
        obj = cj.expect_object(obj, "")
        return cls(
            {
                agent: [_script_line(x, f"{agent}[{i}]") for i, x in enumerate(cj.expect_list(v, agent))]
                for agent, v in obj.items()
            }
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        return cls.from_json(cj.load_file(path))

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for agent, lines in self.script.items():
            items: list[Any] = []
            for line in lines:
                if line.guard is None and line.warning is None and line.finish_reason is FinishReason.STOP:
                    items.append(line.text)
                else:
                    d: dict[str, Any] = {"text": line.text, "finish_reason": line.finish_reason.value}
                    if line.guard is not None:
                        d["guard"] = line.guard
                    if line.warning is not None:
                        d["warning"] = line.warning
                    items.append(d)
            out[agent] = items
        return out

    def complete(self, request: ChatRequest) -> ChatResponse:
        agent = request.agent_name
        with self._lock:
            turn = self._turns.get(agent, 0)
            self._turns[agent] = turn + 1
        lines = self.script.get(agent, ())
        if turn >= len(lines):
            raise ScriptExhausted(agent, turn)
        line = lines[turn]
        if line.guard is not None and not re.search(line.guard, request.messages[-1].content):
            raise ScriptExhausted(agent, turn)
        return ChatResponse(
            text=line.text,
            finish_reason=line.finish_reason,
            warnings=(line.warning,) if line.warning else (),
        )

    def describe(self) -> dict[str, Any]:
        return {"kind": "scripted", "script_digest": cj.digest(cj.canonical_json(self.to_json()))}


# --- fixtures -----------------------------------------------------------------


class ReplayBackend:
    """Serves responses from ``{fixture_key}.json`` files; safe to share across threads."""

    def __init__(self, fixture_dir: str | Path):
        self.fixture_dir = Path(fixture_dir)

    def complete(self, request: ChatRequest) -> ChatResponse:
        key = fixture_key(request)
        path = self.fixture_dir / f"{key}.json"
        if not path.is_file():
            raise FixtureMissing(key)
        doc = cj.expect_object(cj.load_file(path), str(path))
        return response_from_dict(cj.get(doc, "response", ""))

    def describe(self) -> dict[str, Any]:
        return {"kind": "replay", "fixture_dir": str(self.fixture_dir)}


class RecordingBackend:
    """Wraps a live backend and persists every successful exchange as a fixture.

    Its snapshot descriptor is the replay descriptor for the same directory,
    since replay is how a recorded run is reproduced.
    """

    def __init__(self, inner: Backend, fixture_dir: str | Path):
        self.inner = inner
        self.fixture_dir = Path(fixture_dir)

    def complete(self, request: ChatRequest) -> ChatResponse:
        response = self.inner.complete(request)
        key = fixture_key(request)
        doc = {"request_canonical": request_to_dict(request), "response": response_to_dict(response)}
        path = self.fixture_dir / f"{key}.json"
        try:
            self.fixture_dir.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=self.fixture_dir, suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(cj.canonical_json(doc))
            os.replace(tmp, path)
        except OSError as exc:
            raise FixtureIoError(str(path), str(exc)) from exc
        # fixtures never carry warnings, so neither does the recorded response
        return replace(response, warnings=())

    def describe(self) -> dict[str, Any]:
        return ReplayBackend(self.fixture_dir).describe()


def record(backend: Backend, fixture_dir: str | Path) -> RecordingBackend:
    return RecordingBackend(backend, fixture_dir)


# --- remote HTTP --------------------------------------------------------------

_FINISH = {
    "stop": FinishReason.STOP,
    "length": FinishReason.LENGTH,
    "tool_calls": FinishReason.TOOL_DIRECTIVE,
    "function_call": FinishReason.TOOL_DIRECTIVE,
}


class HttpBackend:
    """OpenAI-compatible ``POST {endpoint}/chat/completions`` client.

    The bearer token is read from the environment variable named by
    ``token_env`` at call time and is never part of ``describe()``.
    """

    def __init__(
        self,
        endpoint: str,
        token_env: str | None = None,
        timeout_s: float = DEFAULT_TIMEOUT_S,
        retries: int = 1,
        backoff_s: float = 1.0,
        client: httpx.Client | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.token_env = token_env
        self.timeout_s = timeout_s
        self.retries = retries
        self.backoff_s = backoff_s
        # an injected client (e.g. over MockTransport) is used as is
        self._client = client if client is not None else httpx.Client(timeout=timeout_s)

    def close(self) -> None:
        self._client.close()

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.token_env:
            token = os.environ.get(self.token_env)
            if token:
                headers["Authorization"] = f"Bearer {token}"
            else:
                logger.warning("environment variable %s is not set; sending no token", self.token_env)
        return headers

    def complete(self, request: ChatRequest) -> ChatResponse:
        url = f"{self.endpoint}/chat/completions"
        body = wire_body(request)
        attempt = 0
        while True:
            try:
                resp = self._client.post(url, json=body, headers=self._headers())
            except httpx.TimeoutException:
                raise BackendTimeout(int(self.timeout_s * 1000)) from None
            except httpx.HTTPError as exc:
                raise HttpError(0, str(exc)[:200]) from None
            if resp.status_code >= 500 and attempt < self.retries:
                attempt += 1
                logger.warning("HTTP %s from %s, retrying", resp.status_code, url)
                time.sleep(self.backoff_s)
                continue
            break
        if resp.status_code >= 400:
            raise HttpError(resp.status_code, resp.text[:200])
        try:
            payload = resp.json()
            choice = payload["choices"][0]
            text = choice["message"].get("content") or ""
            finish = _FINISH.get(choice.get("finish_reason") or "stop", FinishReason.STOP)
            usage = payload.get("usage") or {}
            return ChatResponse(
                text=text,
                finish_reason=finish,
                prompt_tokens=int(usage.get("prompt_tokens", 0)),
                completion_tokens=int(usage.get("completion_tokens", 0)),
            )
        except (ValueError, KeyError, IndexError, TypeError, AttributeError) as exc:
            raise BackendError(f"unusable completion payload: {exc}") from None

    def describe(self) -> dict[str, Any]:
        return {"kind": "http", "endpoint": self.endpoint, "token_env": self.token_env}


__all__ = [
    "Backend",
    "ChatRequest",
    "ChatResponse",
    "ChatRole",
    "FinishReason",
    "HttpBackend",
    "RecordingBackend",
    "ReplayBackend",
    "ScriptLine",
    "ScriptedBackend",
    "complete",
    "fixture_key",
    "record",
    "request_to_dict",
    "wire_body",
]
