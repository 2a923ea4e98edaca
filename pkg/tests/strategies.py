"""Hypothesis strategies shared by the property suites."""

from __future__ import annotations

import functools
import operator
import string

from hypothesis import strategies as st

from agilesim.agent_config import (
    AgentDefinition,
    AgentType,
    PromptTemplate,
    RoleCategory,
    SamplingParams,
    TemplateMessage,
    TemplateRole,
    ToolGrants,
)

_ID_START = string.ascii_letters + "_"
# same language as [A-Za-z_][A-Za-z0-9_]{0,11}, but far cheaper to draw than from_regex
identifiers = st.builds(operator.add, st.sampled_from(_ID_START), st.text(_ID_START + string.digits, max_size=11))
# template literal text: anything but braces, which would start a field
literal = st.text(st.characters(blacklist_characters="{}", blacklist_categories=("Cs",)), max_size=20)
names = st.text(st.characters(blacklist_categories=("Cs", "Cc")), min_size=1, max_size=30).filter(
    lambda s: s.strip() != ""
)


# Template bodies are drawn as one string over printable text plus private-use
# code points that stand for an escaped brace, a variable slot, or the start of
# the next message. One string draw is far cheaper than nested lists of pieces.
_ESC_OPEN, _ESC_CLOSE, _NEXT = "\ue000", "\ue001", "\ue002"
_SLOTS = "\ue010\ue011\ue012\ue013"
_TEXT_CHARS = "".join(c for c in string.printable if c not in "{}") + "é—中\u2028\x00\x7f\U0001f600"
_BODY_CODES = st.text(alphabet=_TEXT_CHARS + _ESC_OPEN + _ESC_CLOSE + _NEXT + _SLOTS, max_size=80)


def _resolve(code: str, variables: list[str]) -> str:
    out = []
    for c in code:
        if c == _ESC_OPEN:
            out.append("{{")
        elif c == _ESC_CLOSE:
            out.append("}}")
        elif c in _SLOTS:
            if variables:
                out.append("{" + variables[_SLOTS.index(c) % len(variables)] + "}")
        else:
            out.append(c)
    return "".join(out)


def coded_text(n_codes: int, max_size: int = 40):
    """Lists whose items are literal runs (str, brace-free) or code ints in ``range(n_codes)``.

    Drawn as a single string; code ``i`` is the private-use character U+E010+i.
    """
    codes = "".join(chr(0xE010 + i) for i in range(n_codes))

    def decode(text: str) -> list:
        out: list = []
        for c in text:
            if c in codes:
                out.append(codes.index(c))
            elif out and isinstance(out[-1], str):
                out[-1] += c
            else:
                out.append(c)
        return out

    return st.text(alphabet=_TEXT_CHARS + codes, max_size=max_size).map(decode)


def _identifier_lists(min_size: int, max_size: int):
    # comma-separated candidates in one draw; invalid or repeated names are dropped
    def decode(code: str) -> list[str]:
        out = []
        for part in code.split(","):
            if part and not part[0].isdigit() and part not in out:
                out.append(part[:12])
        return list(dict.fromkeys(out))[:max_size]

    alphabet = string.ascii_letters[:8] + "XYZ_" + "019" + ","
    return st.text(alphabet=alphabet, max_size=6 * max_size).map(decode).filter(lambda xs: len(xs) >= min_size)


_TOOLS = ["search", "TavilySearchResults", "calc", "wiki"]
# every ordered selection of at most two distinct tools
_TOOL_LISTS = [[]] + [[a] for a in _TOOLS] + [[a, b] for a in _TOOLS for b in _TOOLS if a != b]
_VARIABLES = _identifier_lists(0, 4)
_RETURN_VALUES = _identifier_lists(1, 2)


_MODELS = ["gpt-3.5-turbo", "gpt-4", "local-model"]
_AGENT_TYPES = list(AgentType)
_ROLE_CATEGORIES = list(RoleCategory)
# all discrete choices of a definition packed into one integer draw
_DISCRETE = st.integers(0, 2**48)
_TEMPERATURES = st.floats(0.0, 1.0)
_MAX_TOKENS = st.integers(0, 8192)  # 0 stands for "no limit" (None)
_PENALTIES = st.floats(-2.0, 2.0)


def _digits(n: int, *bases: int) -> list[int]:
    out = []
    for b in bases:
        n, d = divmod(n, b)
        out.append(d)
    return out


@st.composite
def agent_definitions(draw) -> AgentDefinition:
    """Valid agent definitions (validate() returns no violations)."""
    # every strategy used here is built once at import, and discrete choices
    # share one draw: per-draw overhead is what makes composites slow
    variables = draw(_VARIABLES)
    model, kind, role, basic_i, external_i, slot, where = _digits(
        draw(_DISCRETE), len(_MODELS), len(_AGENT_TYPES), len(_ROLE_CATEGORIES), len(_TOOL_LISTS), len(_TOOL_LISTS), 8, 8
    )
    bodies = [_resolve(part, variables) for part in draw(_BODY_CODES).split(_NEXT)][:4]
    messages = [TemplateMessage(TemplateRole.SYSTEM, bodies[0])]
    messages += [TemplateMessage(TemplateRole.USER, b) for b in bodies[1:]]
    if slot < len(variables):  # otherwise no placeholder
        messages.insert(1 + where % len(messages), TemplateMessage(TemplateRole.PLACEHOLDER, variables[slot]))
    agent_type = _AGENT_TYPES[kind]
    basic = list(_TOOL_LISTS[basic_i])
    external = [t for t in _TOOL_LISTS[external_i] if t not in basic]
    if agent_type is AgentType.DIALOGUE_AGENT_WITH_TOOLS and not basic + external:
        external = ["search"]
    if agent_type is AgentType.DIALOGUE_AGENT:
        basic, external = [], []
    return AgentDefinition(
        agent_name=draw(names),
        prompt=PromptTemplate(frozenset(variables), tuple(messages)),
        llm=SamplingParams(
            model_name=_MODELS[model],
            temperature=draw(_TEMPERATURES),
            max_tokens=draw(_MAX_TOKENS) or None,
            presence_penalty=draw(_PENALTIES),
            frequency_penalty=draw(_PENALTIES),
        ),
        return_values=tuple(draw(_RETURN_VALUES)),
        agent_type=agent_type,
        tools=ToolGrants(tuple(basic), tuple(external)),
        role_category=_ROLE_CATEGORIES[role],
    )


# small vocabularies keep collisions (duplicates, shared words) frequent
VOCAB = [
    "good", "great", "ready", "bad", "risk", "delay", "plan", "sprint", "demo", "team",
    "the", "and", "we", "it", "road", "map", "pi", "objectives", "done", "blocked",
]
SEPARATORS = [" ", "  ", ", ", ". ", "! ", "\n", " - ", "? "]


_CASES = (str.lower, str.upper, str.capitalize)


@functools.lru_cache(maxsize=None)
def _word_forms(vocab: tuple[str, ...]) -> dict[str, str]:
    # one code character per (word, casing, trailing separator); a whole message
    # is then a single string draw, which is much cheaper than a list of draws
    forms = [case(w) + sep for w in vocab for case in _CASES for sep in SEPARATORS]
    return {chr(0x4E00 + i): f for i, f in enumerate(forms)}


def message_texts(vocab=VOCAB, allow_empty: bool = True):
    forms = _word_forms(tuple(vocab))
    codes = st.text(alphabet="".join(forms), min_size=0 if allow_empty else 1, max_size=8)
    return codes.map(lambda code: "".join(forms[c] for c in code).strip(" "))


_BOUNDARY = "|"


def transcripts_texts(min_size: int = 1, max_size: int = 10, vocab: list[str] = VOCAB, allow_empty: bool = True):
    """Lists of message texts, drawn as one coded string with ``|`` between messages."""
    forms = _word_forms(tuple(vocab))
    codes = st.text(alphabet="".join(forms) + _BOUNDARY, max_size=8 * max_size)

    def decode(code: str) -> list[str]:
        parts = [] if code == "" and min_size == 0 else code.split(_BOUNDARY)
        texts = ["".join(forms[c] for c in part).strip(" ") for part in parts]
        if not allow_empty:
            texts = [t for t in texts if t]
        return texts[:max_size]

    return codes.map(decode).filter(lambda texts: len(texts) >= min_size)


def grouped(words: list[str], min_groups: int = 1, max_groups: int = 5, max_per_group: int = 3):
    """Nonempty lists of nonempty word groups, drawn as one coded string."""
    table = {chr(0x4E00 + i): w for i, w in enumerate(words)}

    def decode(code: str) -> list[list[str]]:
        groups = [[table[c] for c in part][:max_per_group] for part in code.split(_BOUNDARY)]
        return [g for g in groups if g][:max_groups]

    codes = st.text(alphabet="".join(table) + _BOUNDARY, min_size=1, max_size=max_groups * (max_per_group + 1))
    return codes.map(decode).filter(lambda gs: len(gs) >= min_groups)
