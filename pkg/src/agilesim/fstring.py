"""Minimal f-string style templates: ``{name}`` fields, ``{{``/``}}`` escapes.

Only bare identifiers are accepted inside braces. Attribute access, indexing,
conversions and format specs are rejected as unbalanced braces.
"""

from __future__ import annotations

import functools
import re
from typing import Iterator, Mapping

from agilesim.errors import MissingBinding, UnbalancedBrace

IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_FIELD = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")


def is_identifier(name: str) -> bool:
    return IDENTIFIER.fullmatch(name) is not None


def _scan(text: str) -> Iterator[tuple[str, bool]]:
    """Yield ``(chunk, is_field)``; literal chunks already have escapes resolved."""
    i = 0
    n = len(text)
    start = 0
    buf: list[str] = []
    while i < n:
        c = text[i]
        if c == "{":
            if text.startswith("{{", i):
                buf.append(text[start:i] + "{")
                i += 2
                start = i
                continue
            m = _FIELD.match(text, i)
            if m is None:
                raise UnbalancedBrace(i)
            buf.append(text[start:i])
            literal = "".join(buf)
            buf = []
            if literal:
                yield literal, False
            yield m.group(1), True
            i = m.end()
            start = i
        elif c == "}":
            if text.startswith("}}", i):
                buf.append(text[start:i] + "}")
                i += 2
                start = i
                continue
            raise UnbalancedBrace(i)
        else:
            i += 1
    buf.append(text[start:])
    literal = "".join(buf)
    if literal:
        yield literal, False


@functools.lru_cache(maxsize=1024)
def _parsed(text: str) -> tuple[tuple[str, bool], ...]:
    return tuple(_scan(text))


def _chunks(text: str):
    """Memoized :func:`_scan`; malformed text is rescanned lazily so errors surface in order."""
    try:
        return _parsed(text)
    except UnbalancedBrace:
        return _scan(text)


def extract_variables(template_text: str) -> set[str]:
    return {chunk for chunk, is_field in _chunks(template_text) if is_field}


def ordered_variables(template_text: str) -> list[str]:
    """Field names in order of first occurrence."""
    seen: dict[str, None] = {}
    for chunk, is_field in _chunks(template_text):
        if is_field:
            seen.setdefault(chunk)
    return list(seen)


def render_template(template_text: str, bindings: Mapping[str, str]) -> str:
    out = []
    for chunk, is_field in _chunks(template_text):
        if is_field:
            if chunk not in bindings:
                raise MissingBinding(chunk)
            out.append(bindings[chunk])
        else:
            out.append(chunk)
    return "".join(out)
