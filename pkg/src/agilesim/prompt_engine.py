"""Turn an agent definition plus bindings and history into wire-ready messages."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from agilesim.agent_config import AgentDefinition, TemplateRole
from agilesim.errors import MissingBinding
from agilesim.fstring import extract_variables, is_identifier, render_template
from agilesim.transcript import FullMemory, MemoryPolicy, Transcript, apply_memory_policy

logger = logging.getLogger(__name__)

__all__ = [
    "Bindings",
    "ChatRole",
    "RenderedMessage",
    "build_prompt",
    "extract_variables",
    "history_line",
    "render_template",
]

Bindings = Mapping[str, str]


class ChatRole(str, Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


@dataclass(frozen=True)
class RenderedMessage:
    role: ChatRole
    content: str


def history_line(agent_name: str, content: str) -> str:
    return f"{agent_name}: {content}"


def build_prompt(
    defn: AgentDefinition,
    bindings: Bindings,
    history: Transcript = (),
    memory: MemoryPolicy = FullMemory(),
) -> list[RenderedMessage]:
    """Render the agent's template messages in declared order.

    A placeholder expands to the memory-filtered history, one user message per
    past turn formatted ``"Name: content"``, then the placeholder variable's
    own bound value if there is one. Past turns go in as user messages since
    several distinct speakers cannot all be the assistant.
    """
    template = defn.prompt
    placeholders = set(template.placeholder_names)
    for name in sorted(template.input_variables - placeholders):
        if name not in bindings:
            raise MissingBinding(name)
    unknown = sorted(k for k in bindings if k not in template.input_variables)
    if unknown:
        logger.warning("ignoring undeclared bindings for %s: %s", defn.agent_name, ", ".join(unknown))
    bad = [k for k in bindings if not is_identifier(k)]
    if bad:
        raise ValueError(f"binding keys must be identifiers: {bad}")

    out: list[RenderedMessage] = []
    window = apply_memory_policy(memory, history)
    for msg in template.template_messages:
        if msg.role is TemplateRole.PLACEHOLDER:
            out.extend(
                RenderedMessage(ChatRole.USER, history_line(turn.agent_name, turn.content))
                for turn in window
            )
            if msg.content in bindings:
                out.append(RenderedMessage(ChatRole.USER, bindings[msg.content]))
            continue
        role = ChatRole.SYSTEM if msg.role is TemplateRole.SYSTEM else ChatRole.USER
        out.append(RenderedMessage(role, render_template(msg.content, bindings)))
    return out
