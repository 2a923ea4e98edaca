"""Tool registry, textual tool directives and grant enforcement.

A model asks for a tool by writing a directive anywhere in its reply::

    <<tool:search {"q": "bayesian network trading"}>>

The JSON object is optional (``<<tool:NAME>>`` means no arguments); when
present its values must all be strings.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Mapping

from agilesim import canonical as cj
from agilesim.agent_config import ToolGrants
from agilesim.errors import MalformedDirective, ToolNotGranted, ToolUnknown

logger = logging.getLogger(__name__)

DEFAULT_MAX_TOOL_CALLS = 3
SEARCH_TOOL = "search"
# external tool name used in agent documents for the web search tool
SEARCH_ALIASES = ("TavilySearchResults",)

_OPEN = "<<tool:"
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*")


class ToolKind(str, Enum):
    BASIC = "basic"
    EXTERNAL = "external"


@dataclass(frozen=True)
class ToolResult:
    ok: bool
    content: str

    def __post_init__(self) -> None:
        if self.ok and not self.content:
            raise ValueError("successful tool result must have content")


@dataclass(frozen=True)
class ToolCallDirective:
    tool_name: str
    args: Mapping[str, str] = field(default_factory=dict)


Handler = Callable[[Mapping[str, str]], ToolResult]


@dataclass(frozen=True)
class ToolSpec:
    name: str
    description: str
    kind: ToolKind
    handler: Handler
    aliases: tuple[str, ...] = ()


def parse_tool_directive(model_text: str) -> ToolCallDirective | None:
    """Return the first directive in ``model_text``, or None if there is none."""
    start = model_text.find(_OPEN)
    if start < 0:
        return None
    end_guess = model_text.find(">>", start)
    snippet = model_text[start : end_guess + 2 if end_guess >= 0 else start + 80]
    pos = start + len(_OPEN)
    m = _NAME.match(model_text, pos)
    if m is None:
        raise MalformedDirective(snippet)
    name = m.group(0)
    pos = m.end()
    while pos < len(model_text) and model_text[pos].isspace():
        pos += 1
    args: dict[str, str] = {}
    if model_text.startswith("{", pos):
        try:
            raw, pos = json.JSONDecoder().raw_decode(model_text, pos)
        except json.JSONDecodeError:
            raise MalformedDirective(snippet) from None
        if not isinstance(raw, dict) or not all(isinstance(v, str) for v in raw.values()):
            raise MalformedDirective(snippet)
        args = raw
        while pos < len(model_text) and model_text[pos].isspace():
            pos += 1
    if not model_text.startswith(">>", pos):
        raise MalformedDirective(snippet)
    return ToolCallDirective(name, args)


class ToolRegistry:
    """Immutable after construction; handlers are looked up by name or alias."""

    def __init__(self, specs: Iterable[ToolSpec] = ()):
        self._specs: dict[str, ToolSpec] = {}
        self._alias: dict[str, str] = {}
        for spec in specs:
            for name in (spec.name, *spec.aliases):
                if name in self._alias:
                    raise ValueError(f"duplicate tool name {name!r}")
                self._alias[name] = spec.name
            self._specs[spec.name] = spec

    def canonical_name(self, name: str) -> str:
        return self._alias.get(name, name)

    def get(self, name: str) -> ToolSpec | None:
        return self._specs.get(self.canonical_name(name))

    def names(self) -> list[str]:
        return list(self._specs)

    def is_granted(self, grants: ToolGrants, name: str) -> bool:
        granted = {self.canonical_name(g) for g in grants.all}
        return self.canonical_name(name) in granted


def invoke_tool(
    registry: ToolRegistry, grants: ToolGrants, directive: ToolCallDirective
) -> ToolResult:
    if not registry.is_granted(grants, directive.tool_name):
        raise ToolNotGranted(directive.tool_name)
    spec = registry.get(directive.tool_name)
    if spec is None:
        raise ToolUnknown(directive.tool_name)
    try:
        result = spec.handler(dict(directive.args))
    except Exception as exc:  # handler failures are data, not run-enders
        logger.warning("tool %s failed: %s", spec.name, exc)
        return ToolResult(False, f"{type(exc).__name__}: {exc}")
    return result


def tool_message(name: str, result: ToolResult) -> str:
    """Text of the user message that feeds a tool result back to the model."""
    content = result.content if result.ok else f"ERROR {result.content}"
    return f"TOOL({name}): {content}"


def stub_search(corpus: Mapping[str, str] | None = None) -> ToolSpec:
    """Offline stand-in for web search; a pure function of the ``q`` argument."""
    table = dict(corpus or {})

    def handler(args: Mapping[str, str]) -> ToolResult:
        query = args.get("q", args.get("query", ""))
        return ToolResult(True, table.get(query, f"RESULT[{query}]"))

    return ToolSpec(
        name=SEARCH_TOOL,
        description="Search the web (deterministic stub).",
        kind=ToolKind.EXTERNAL,
        handler=handler,
        aliases=SEARCH_ALIASES,
    )


def load_stub_corpus(path: str | Path) -> dict[str, str]:
    return cj.expect_str_map(cj.load_file(path), "")


def default_registry(corpus_path: str | Path | None = None) -> ToolRegistry:
    corpus = load_stub_corpus(corpus_path) if corpus_path else None
    return ToolRegistry([stub_search(corpus)])
