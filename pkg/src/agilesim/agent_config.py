"""Agent definition documents: parsing, validation, canonical encoding.

An agent file (``*.agent.json``) has the top-level keys ``agent_name``,
``role_category``, ``prompt``, ``llm``, ``tools``, ``return_values`` and
``agent_type``. Unknown top-level keys survive a parse/canonicalize round
trip but are reported through the module logger.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

from agilesim import canonical as cj
from agilesim.errors import UnbalancedBrace
from agilesim.fstring import is_identifier, ordered_variables

logger = logging.getLogger(__name__)

TEMPERATURE_RANGE = (0.0, 1.0)
PENALTY_RANGE = (-2.0, 2.0)


class RoleCategory(str, Enum):
    MANAGER = "Manager"
    EXECUTOR = "Executor"
    QUALITY_CHECKER = "QualityChecker"
    METHODOLOGY_REVIEWER = "MethodologyReviewer"


class AgentType(str, Enum):
    DIALOGUE_AGENT = "dialogue_agent"
    DIALOGUE_AGENT_WITH_TOOLS = "dialogue_agent_with_tools"


class TemplateRole(str, Enum):
    SYSTEM = "system"
    USER = "user"
    PLACEHOLDER = "placeholder"


class TemplateFormat(str, Enum):
    FSTRING = "f-string"


@dataclass(frozen=True)
class TemplateMessage:
    role: TemplateRole
    content: str


@dataclass(frozen=True)
class PromptTemplate:
    input_variables: frozenset[str]
    template_messages: tuple[TemplateMessage, ...]
    template_format: TemplateFormat = TemplateFormat.FSTRING

    @property
    def placeholder_names(self) -> tuple[str, ...]:
        return tuple(
            m.content for m in self.template_messages if m.role is TemplateRole.PLACEHOLDER
        )


@dataclass(frozen=True)
class SamplingParams:
    model_name: str
    temperature: float
    max_tokens: int | None = None
    presence_penalty: float = 0.0
    frequency_penalty: float = 0.0


@dataclass(frozen=True)
class ToolGrants:
    allowed_basic_tools: tuple[str, ...] = ()
    allowed_external_tools: tuple[str, ...] = ()

    @property
    def all(self) -> tuple[str, ...]:
        return self.allowed_basic_tools + self.allowed_external_tools

    def __bool__(self) -> bool:
        return bool(self.all)


@dataclass(frozen=True)
class AgentDefinition:
    agent_name: str
    prompt: PromptTemplate
    llm: SamplingParams
    return_values: tuple[str, ...]
    agent_type: AgentType
    tools: ToolGrants = ToolGrants()
    role_category: RoleCategory = RoleCategory.EXECUTOR
    # unknown top-level keys, kept verbatim for round trips
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def uses_tools(self) -> bool:
        return self.agent_type is AgentType.DIALOGUE_AGENT_WITH_TOOLS


@dataclass(frozen=True)
class Violation:
    code: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} at {self.path}: {self.message}"


_TOP_LEVEL = ("agent_name", "role_category", "prompt", "llm", "tools", "return_values", "agent_type")


def _warn_unknown(obj: dict, known: tuple[str, ...], path: str) -> None:
    for key in obj:
        if key not in known:
            logger.warning("unknown key %r in agent definition", cj.join(path, key))


def _parse_prompt(value: Any) -> PromptTemplate:
    obj = cj.expect_object(value, "prompt")
    _warn_unknown(obj, ("input_variables", "template_messages", "template_format"), "prompt")
    variables = cj.expect_str_list(
        cj.get(obj, "input_variables", "prompt"), "prompt.input_variables"
    )
    raw_messages = cj.expect_list(
        cj.get(obj, "template_messages", "prompt"), "prompt.template_messages"
    )
    messages = []
    for i, raw in enumerate(raw_messages):
        path = cj.join("prompt.template_messages", i)
        m = cj.expect_object(raw, path)
        role = cj.expect_enum(cj.get(m, "role", path), TemplateRole, cj.join(path, "role"))
        content = cj.expect_str(cj.get(m, "content", path), cj.join(path, "content"))
        messages.append(TemplateMessage(role, content))
    fmt = cj.expect_enum(
        cj.get(obj, "template_format", "prompt"), TemplateFormat, "prompt.template_format"
    )
    return PromptTemplate(frozenset(variables), tuple(messages), fmt)


def _parse_llm(value: Any) -> SamplingParams:
    obj = cj.expect_object(value, "llm")
    _warn_unknown(
        obj,
        ("model_name", "temperature", "max_tokens", "presence_penalty", "frequency_penalty"),
        "llm",
    )
    max_tokens = cj.get(obj, "max_tokens", "llm", None)
    if max_tokens is not None:
        max_tokens = cj.expect_int(max_tokens, "llm.max_tokens")
    return SamplingParams(
        model_name=cj.expect_str(cj.get(obj, "model_name", "llm"), "llm.model_name"),
        temperature=cj.expect_number(cj.get(obj, "temperature", "llm"), "llm.temperature"),
        max_tokens=max_tokens,
        presence_penalty=cj.expect_number(
            cj.get(obj, "presence_penalty", "llm", 0.0), "llm.presence_penalty"
        ),
        frequency_penalty=cj.expect_number(
            cj.get(obj, "frequency_penalty", "llm", 0.0), "llm.frequency_penalty"
        ),
    )


def _parse_tools(value: Any) -> ToolGrants:
    obj = cj.expect_object(value, "tools")
    _warn_unknown(obj, ("allowed_basic_tools", "allowed_external_tools"), "tools")
    basic = cj.get(obj, "allowed_basic_tools", "tools", [])
    external = cj.get(obj, "allowed_external_tools", "tools", [])
    # "None" in a hand-written document means no grants
    basic = [] if basic is None else basic
    external = [] if external is None else external
    return ToolGrants(
        tuple(cj.expect_str_list(basic, "tools.allowed_basic_tools")),
        tuple(cj.expect_str_list(external, "tools.allowed_external_tools")),
    )


def agent_from_dict(obj: Any) -> AgentDefinition:
    obj = cj.expect_object(obj, "")
    agent_name = cj.expect_str(cj.get(obj, "agent_name", ""), "agent_name")
    role_category = cj.expect_enum(
        cj.get(obj, "role_category", "", RoleCategory.EXECUTOR.value),
        RoleCategory,
        "role_category",
    )
    prompt = _parse_prompt(cj.get(obj, "prompt", ""))
    llm = _parse_llm(cj.get(obj, "llm", ""))
    tools = _parse_tools(cj.get(obj, "tools", "", {}))
    return_values = tuple(cj.expect_str_list(cj.get(obj, "return_values", ""), "return_values"))
    agent_type = cj.expect_enum(cj.get(obj, "agent_type", ""), AgentType, "agent_type")
    extra = {k: v for k, v in obj.items() if k not in _TOP_LEVEL}
    for key in sorted(extra):
        logger.warning("unknown top-level key %r in agent %r (preserved)", key, agent_name)
    return AgentDefinition(
        agent_name=agent_name,
        prompt=prompt,
        llm=llm,
        return_values=return_values,
        agent_type=agent_type,
        tools=tools,
        role_category=role_category,
        extra=extra,
    )


def parse_agent_definition(raw_json_text: str | bytes, source: str | None = None) -> AgentDefinition:
    return agent_from_dict(cj.loads(raw_json_text, source))


def load_agent_definition(path: str | Path) -> AgentDefinition:
    path = Path(path)
    return parse_agent_definition(path.read_bytes(), str(path))


def agent_to_dict(defn: AgentDefinition) -> dict[str, Any]:
    out: dict[str, Any] = dict(defn.extra)
    out.update(
        agent_name=defn.agent_name,
        role_category=defn.role_category.value,
        prompt={
            "input_variables": sorted(defn.prompt.input_variables),
            "template_messages": [
                {"role": m.role.value, "content": m.content} for m in defn.prompt.template_messages
            ],
            "template_format": defn.prompt.template_format.value,
        },
        llm={
            "model_name": defn.llm.model_name,
            "temperature": float(defn.llm.temperature),
            "max_tokens": defn.llm.max_tokens,
            "presence_penalty": float(defn.llm.presence_penalty),
            "frequency_penalty": float(defn.llm.frequency_penalty),
        },
        tools={
            "allowed_basic_tools": list(defn.tools.allowed_basic_tools),
            "allowed_external_tools": list(defn.tools.allowed_external_tools),
        },
        return_values=list(defn.return_values),
        agent_type=defn.agent_type.value,
    )
    return out


def canonicalize(defn: AgentDefinition) -> str:
    return cj.cached_canonical(defn, agent_to_dict)


def agent_digest(defn: AgentDefinition) -> str:
    return cj.digest(canonicalize(defn))


def _range(path: str, value: float, bounds: tuple[float, float]) -> Violation | None:
    lo, hi = bounds
    if lo <= value <= hi:
        return None
    return Violation("RangeViolation", path, f"{value!r} not in [{lo}, {hi}]")


def validate_agent_definition(defn: AgentDefinition) -> list[Violation]:
    """Every broken invariant, once each, in document order. Empty means valid."""
    out: list[Violation] = []

    if not defn.agent_name.strip():
        out.append(Violation("EmptyValue", "agent_name", "agent name is empty"))

    prompt = defn.prompt
    for name in sorted(prompt.input_variables):
        if not is_identifier(name):
            out.append(
                Violation("BadIdentifier", "prompt.input_variables", f"{name!r} is not an identifier")
            )
    if not any(m.role is TemplateRole.SYSTEM for m in prompt.template_messages):
        out.append(
            Violation("MissingSystemMessage", "prompt.template_messages", "no system message")
        )
    for i, msg in enumerate(prompt.template_messages):
        path = f"prompt.template_messages[{i}].content"
        if msg.role is TemplateRole.PLACEHOLDER:
            if not is_identifier(msg.content):
                out.append(
                    Violation("BadPlaceholder", path, f"{msg.content!r} is not a bare identifier")
                )
            elif msg.content not in prompt.input_variables:
                out.append(
                    Violation("UndeclaredVariable", path, f"placeholder {msg.content!r} not declared")
                )
            continue
        try:
            names = ordered_variables(msg.content)
        except UnbalancedBrace as exc:
            out.append(Violation("UnbalancedBrace", path, str(exc)))
            continue
        for name in names:
            if name not in prompt.input_variables:
                out.append(Violation("UndeclaredVariable", path, f"{{{name}}} not declared"))

    llm = defn.llm
    if not llm.model_name.strip():
        out.append(Violation("EmptyValue", "llm.model_name", "model name is empty"))
    for v in (
        _range("llm.temperature", llm.temperature, TEMPERATURE_RANGE),
        None
        if llm.max_tokens is None or llm.max_tokens > 0
        else Violation("RangeViolation", "llm.max_tokens", f"{llm.max_tokens} is not positive"),
        _range("llm.presence_penalty", llm.presence_penalty, PENALTY_RANGE),
        _range("llm.frequency_penalty", llm.frequency_penalty, PENALTY_RANGE),
    ):
        if v is not None:
            out.append(v)

    seen: set[str] = set()
    for list_name in ("allowed_basic_tools", "allowed_external_tools"):
        for i, tool in enumerate(getattr(defn.tools, list_name)):
            path = f"tools.{list_name}[{i}]"
            if not tool.strip():
                out.append(Violation("EmptyValue", path, "tool name is empty"))
            elif tool in seen:
                out.append(Violation("DuplicateTool", path, f"{tool!r} granted more than once"))
            seen.add(tool)

    if not defn.return_values:
        out.append(Violation("EmptyValue", "return_values", "no return values"))
    for i, name in enumerate(defn.return_values):
        if not is_identifier(name):
            out.append(
                Violation("BadIdentifier", f"return_values[{i}]", f"{name!r} is not an identifier")
            )

    if defn.agent_type is AgentType.DIALOGUE_AGENT and defn.tools:
        out.append(
            Violation(
                "AgentTypeMismatch",
                "agent_type",
                "dialogue_agent has tool grants; use dialogue_agent_with_tools",
            )
        )
    elif defn.agent_type is AgentType.DIALOGUE_AGENT_WITH_TOOLS and not defn.tools:
        logger.warning("agent %r is dialogue_agent_with_tools but grants no tools", defn.agent_name)

    return out
