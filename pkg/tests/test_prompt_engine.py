import pytest

from agilesim.errors import MissingBinding
from agilesim.prompt_engine import ChatRole, build_prompt
from agilesim.transcript import FullMemory, LastK

from conftest import msgs

BINDINGS = {"client_analysis": "X", "solution_architect_feedback": "Y", "instruction": "begin"}


def test_box1_message_order(pm):
    out = build_prompt(pm, BINDINGS)
    assert [m.role for m in out] == [ChatRole.SYSTEM, ChatRole.USER, ChatRole.USER, ChatRole.USER]
    assert out[0].content == pm.prompt.template_messages[0].content
    assert out[1].content == "This is the client analysis X."
    assert out[2].content == "This is the solution architect feedback Y."
    assert out[3].content == "begin"


def test_last_k_window(pm):
    history = msgs("one", "two", "three", "four", "five")
    out = build_prompt(pm, BINDINGS, history, LastK(3))
    assert [m.content for m in out[3:]] == ["A: three", "B: four", "A: five", "begin"]
    assert all(m.role is ChatRole.USER for m in out[3:])


def test_full_memory_keeps_order(pm):
    history = msgs("one", "two", "three", "four", "five")
    out = build_prompt(pm, BINDINGS, history, FullMemory())
    assert [m.content for m in out[3:-1]] == ["A: one", "B: two", "A: three", "B: four", "A: five"]


def test_missing_binding(pm):
    with pytest.raises(MissingBinding) as exc:
        build_prompt(pm, {"instruction": "x", "client_analysis": "c"})
    assert exc.value.name == "solution_architect_feedback"


def test_placeholder_binding_optional(pm):
    bindings = {k: v for k, v in BINDINGS.items() if k != "instruction"}
    out = build_prompt(pm, bindings, msgs("hi"))
    assert out[-1].content == "A: hi"


def test_unknown_bindings_warn(pm, caplog):
    out = build_prompt(pm, {**BINDINGS, "mood": "happy"})
    assert len(out) == 4
    assert "mood" in caplog.text
