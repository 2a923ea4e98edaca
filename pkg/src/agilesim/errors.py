"""Exception hierarchy.

Every error that can end a simulation carries a dotted ``code`` which is
what the execution log records.
"""

from __future__ import annotations


class AgilesimError(Exception):
    code = "error"


# --- document / schema errors -------------------------------------------------


class ConfigError(AgilesimError):
    code = "config.invalid"


class MalformedJson(ConfigError):
    code = "config.malformed_json"

    def __init__(self, detail: str, source: str | None = None):
        self.detail = detail
        self.source = source
        where = f"{source}: " if source else ""
        super().__init__(f"{where}malformed JSON: {detail}")


class MissingField(ConfigError):
    code = "config.missing_field"

    def __init__(self, path: str):
        self.path = path
        super().__init__(f"missing field {path!r}")


class BadEnumValue(ConfigError):
    code = "config.bad_enum"

    def __init__(self, path: str, got: object, allowed: tuple[str, ...] = ()):
        self.path = path
        self.got = got
        self.allowed = allowed
        msg = f"bad value {got!r} at {path!r}"
        if allowed:
            msg += f" (expected one of {', '.join(allowed)})"
        super().__init__(msg)


class BadFieldType(ConfigError):
    code = "config.bad_type"

    def __init__(self, path: str, expected: str, got: object):
        self.path = path
        self.expected = expected
        self.got = got
        super().__init__(f"{path!r}: expected {expected}, got {type(got).__name__}")


class DuplicateSimId(ConfigError):
    code = "config.duplicate_sim_id"

    def __init__(self, sim_id: int):
        self.sim_id = sim_id
        super().__init__(f"duplicate sim_id {sim_id}")


class MissingAgentRef(ConfigError):
    code = "config.missing_agent_ref"

    def __init__(self, ref: str, sim_id: int | None = None):
        self.ref = ref
        self.sim_id = sim_id
        where = f" (sim {sim_id})" if sim_id is not None else ""
        super().__init__(f"unresolvable agent reference {ref!r}{where}")


# --- templates ----------------------------------------------------------------


class TemplateError(AgilesimError):
    code = "prompt.error"


class UnbalancedBrace(TemplateError):
    code = "prompt.unbalanced_brace"

    def __init__(self, position: int):
        self.position = position
        super().__init__(f"unbalanced brace at position {position}")


class MissingBinding(TemplateError):
    code = "prompt.missing_binding"

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"no binding for {name!r}")


# --- backends -----------------------------------------------------------------


class BackendError(AgilesimError):
    code = "backend.error"


class HttpError(BackendError):
    code = "backend.http_error"

    def __init__(self, status: int, body_snippet: str):
        self.status = status
        self.body_snippet = body_snippet
        super().__init__(f"HTTP {status}: {body_snippet}")


class FixtureMissing(BackendError):
    code = "backend.fixture_missing"

    def __init__(self, key: str):
        self.key = key
        super().__init__(f"no fixture for key {key}")


class ScriptExhausted(BackendError):
    code = "backend.script_exhausted"

    def __init__(self, agent: str, turn: int):
        self.agent = agent
        self.turn = turn
        super().__init__(f"script has no line for {agent!r} at turn {turn}")


class BackendTimeout(BackendError):
    code = "backend.timeout"

    def __init__(self, timeout_ms: int):
        self.timeout_ms = timeout_ms
        super().__init__(f"request timed out after {timeout_ms} ms")


class FixtureIoError(BackendError):
    code = "backend.io_error"

    def __init__(self, path: str, reason: str):
        self.path = path
        super().__init__(f"cannot write fixture {path}: {reason}")


# --- tools --------------------------------------------------------------------


class ToolError(AgilesimError):
    code = "tool.error"


class MalformedDirective(ToolError):
    code = "tool.malformed_directive"

    def __init__(self, snippet: str):
        self.snippet = snippet
        super().__init__(f"malformed tool directive: {snippet!r}")


class ToolNotGranted(ToolError):
    code = "tool.not_granted"

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"tool {name!r} is not granted to this agent")


class ToolUnknown(ToolError):
    code = "tool.unknown"

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"tool {name!r} is not registered")


# --- orchestration / metrics --------------------------------------------------


class EmptyRoster(AgilesimError):
    code = "run.empty_roster"

    def __init__(self) -> None:
        super().__init__("roster is empty")


class EmptyTranscript(AgilesimError):
    code = "metrics.empty_transcript"

    def __init__(self, what: str = "transcript is empty") -> None:
        super().__init__(what)
