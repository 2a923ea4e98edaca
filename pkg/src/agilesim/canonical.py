"""Canonical JSON encoding and small helpers for schema-checked JSON reading."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, TypeVar

from agilesim.errors import BadEnumValue, BadFieldType, MalformedJson, MissingField

E = TypeVar("E", bound=Enum)

_MISSING = object()


def canonical_json(obj: Any) -> str:
    """Sorted keys at every level, 2-space indent, UTF-8 text, trailing newline.

    Floats use Python's shortest round-trip repr, so ``0.70`` and ``0.7``
    encode identically.
    """
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2, allow_nan=False) + "\n"


def cached_canonical(value: Any, to_doc) -> str:
    """``canonical_json(to_doc(value))``, memoized on the (frozen) instance itself.

    Definitions are treated as immutable values, so the cache can never go stale;
    ``dataclasses.replace`` produces a fresh instance with no cached text.
    """
    text = value.__dict__.get("_canonical_json")
    if text is None:
        text = canonical_json(to_doc(value))
        object.__setattr__(value, "_canonical_json", text)
    return text


@dataclass(frozen=True)
class Fragment:
    """Already-canonical JSON text (trailing newline allowed) to splice into a document."""

    text: str


def compose(obj: Any) -> str:
    """Same bytes as :func:`canonical_json`, but :class:`Fragment` values are spliced in as is."""
    return _compose(obj, 0) + "\n"


_LEAF = json.JSONEncoder(ensure_ascii=False, allow_nan=False).encode


def _compose(obj: Any, level: int) -> str:
    pad = "\n" + "  " * (level + 1)
    if isinstance(obj, Fragment):
        return obj.text.rstrip("\n").replace("\n", "\n" + "  " * level)
    if isinstance(obj, dict) and obj:
        items = [_LEAF(k) + ": " + _compose(obj[k], level + 1) for k in sorted(obj)]
        return "{" + pad + ("," + pad).join(items) + "\n" + "  " * level + "}"
    if isinstance(obj, (list, tuple)) and obj:
        items = [_compose(v, level + 1) for v in obj]
        return "[" + pad + ("," + pad).join(items) + "\n" + "  " * level + "]"
    return _LEAF(obj)


def digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def loads(text: str | bytes, source: str | None = None) -> Any:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedJson(str(exc), source) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedJson(f"{exc.msg} (line {exc.lineno}, column {exc.colno})", source) from exc


def load_file(path: str | Path) -> Any:
    path = Path(path)
    return loads(path.read_bytes(), str(path))


def join(path: str, key: str | int) -> str:
    if isinstance(key, int):
        return f"{path}[{key}]"
    return f"{path}.{key}" if path else key


def get(obj: Mapping[str, Any], key: str, path: str, default: Any = _MISSING) -> Any:
    if key not in obj:
        if default is _MISSING:
            raise MissingField(join(path, key))
        return default
    return obj[key]


def expect_object(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise BadFieldType(path or "<root>", "object", value)
    return value


def expect_str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise BadFieldType(path, "string", value)
    return value


def expect_list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise BadFieldType(path, "array", value)
    return value


def expect_str_list(value: Any, path: str) -> list[str]:
    items = expect_list(value, path)
    return [expect_str(v, join(path, i)) for i, v in enumerate(items)]


def expect_int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise BadFieldType(path, "integer", value)
    return value


def expect_number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise BadFieldType(path, "number", value)
    value = float(value)
    if not math.isfinite(value):
        raise BadFieldType(path, "finite number", value)
    return value


def expect_bool(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise BadFieldType(path, "boolean", value)
    return value


def expect_enum(value: Any, enum_cls: type[E], path: str) -> E:
    allowed = tuple(str(m.value) for m in enum_cls)
    if not isinstance(value, str):
        raise BadEnumValue(path, value, allowed)
    try:
        return enum_cls(value)
    except ValueError:
        raise BadEnumValue(path, value, allowed) from None


def expect_str_map(value: Any, path: str) -> dict[str, str]:
    obj = expect_object(value, path)
    return {k: expect_str(v, join(path, k)) for k, v in obj.items()}
