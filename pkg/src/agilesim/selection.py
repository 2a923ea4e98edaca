"""Speaker selection policies.

Seeded random selection draws from SplitMix64 so the sequence is fixed by
its update rule alone, independent of language runtime::

    state_n = seed + n * 0x9E3779B97F4A7C15            (mod 2**64, n >= 1)
    z = state_n
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9           (mod 2**64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB           (mod 2**64)
    draw_n = z ^ (z >> 31)

Step ``s`` (0-based) uses ``draw_{s+1}``. With no previous speaker the pick is
``roster[draw % len(roster)]``; otherwise the previous speaker is removed
from the roster (order kept) and the pick is ``rest[draw % len(rest)]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence, Union

from agilesim import canonical as cj
from agilesim.errors import BadEnumValue, EmptyRoster
from agilesim.transcript import Transcript

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def splitmix64_mix(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64_draw(seed: int, n: int) -> int:
    """The n-th output (n >= 1) of a SplitMix64 stream started at ``seed``."""
    return splitmix64_mix((seed + n * GAMMA) & MASK64)


class SplitMix64:
    """Sequential form of the same generator, for callers that want a stream."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        return splitmix64_mix(self.state)


@dataclass(frozen=True)
class Alternate:
    def to_dict(self) -> dict[str, Any]:
        return {"kind": "alternate"}


@dataclass(frozen=True)
class SeededRandom:
    seed: int

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "seeded_random", "seed": self.seed}


@dataclass(frozen=True)
class Directed:
    rule: tuple[str, ...]

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "directed", "rule": list(self.rule)}


SpeakerSelection = Union[Alternate, SeededRandom, Directed]


def selection_from_json(value: Any, path: str = "selection") -> SpeakerSelection:
    """Accepts the object forms or the shorthands ``"alternate"``, ``"random:SEED"``,
    ``"directed:A,B,B"``."""
    if isinstance(value, str):
        kind, _, arg = value.partition(":")
        if kind == "alternate" and not arg:
            return Alternate()
        if kind == "random" and arg:
            try:
                return SeededRandom(int(arg))
            except ValueError:
                pass
        if kind == "directed" and arg:
            return Directed(tuple(a.strip() for a in arg.split(",")))
        raise BadEnumValue(path, value, ("alternate", "random:SEED", "directed:A,B"))
    obj = cj.expect_object(value, path)
    kind = cj.expect_str(cj.get(obj, "kind", path), cj.join(path, "kind"))
    if kind == "alternate":
        return Alternate()
    if kind == "seeded_random":
        return SeededRandom(cj.expect_int(cj.get(obj, "seed", path), cj.join(path, "seed")))
    if kind == "directed":
        return Directed(tuple(cj.expect_str_list(cj.get(obj, "rule", path), cj.join(path, "rule"))))
    raise BadEnumValue(cj.join(path, "kind"), kind, ("alternate", "seeded_random", "directed"))


def _pick(selection: SpeakerSelection, step: int, roster: Sequence[str], previous: int | None) -> int:
    if not roster:
        raise EmptyRoster()
    if isinstance(selection, Alternate):
        return step % len(roster)
    if isinstance(selection, Directed):
        if not selection.rule:
            raise ValueError("directed selection needs a nonempty rule")
        name = selection.rule[step % len(selection.rule)]
        try:
            return list(roster).index(name)
        except ValueError:
            raise ValueError(f"directed rule names {name!r}, not in roster") from None
    draw = splitmix64_draw(selection.seed, step + 1)
    if previous is None or len(roster) == 1:
        return draw % len(roster)
    rest = [i for i in range(len(roster)) if i != previous]
    return rest[draw % len(rest)]


def select_next_speaker(
    selection: SpeakerSelection, step: int, roster: Sequence[str], transcript: Transcript = ()
) -> int:
    """Roster index of the agent speaking at ``step``.

    The previous speaker, which seeded random selection avoids, is the author
    of the transcript's last message.
    """
    previous = None
    if transcript:
        last = transcript[-1].agent_name
        previous = list(roster).index(last) if last in roster else None
    return _pick(selection, step, roster, previous)


def speaker_sequence(selection: SpeakerSelection, roster: Sequence[str], steps: int) -> list[int]:
    out: list[int] = []
    for step in range(steps):
        out.append(_pick(selection, step, roster, out[-1] if out else None))
    return out
