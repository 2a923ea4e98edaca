import pytest

from agilesim.errors import MissingBinding, UnbalancedBrace
from agilesim.fstring import extract_variables, ordered_variables, render_template


@pytest.mark.parametrize(
    "text, expected",
    [
        ("This is the client analysis {client_analysis}.", {"client_analysis"}),
        ("no vars here", set()),
        ("literal {{braces}} and {x}", {"x"}),
        ("{a}{b}{a}", {"a", "b"}),
        ("", set()),
    ],
)
def test_extract_variables(text, expected):
    assert extract_variables(text) == expected


def test_ordered_variables_first_occurrence():
    assert ordered_variables("{b} {a} {b} {c}") == ["b", "a", "c"]


def test_render_examples():
    assert (
        render_template("This is the client analysis {client_analysis}.", {"client_analysis": "X"})
        == "This is the client analysis X."
    )
    assert render_template("{a}{a}", {"a": "z"}) == "zz"
    assert render_template("{{x}}", {}) == "{x}"
    assert render_template("}}{{", {}) == "}{"


def test_render_missing_binding():
    with pytest.raises(MissingBinding) as exc:
        render_template("hello {missing}", {})
    assert exc.value.name == "missing"


def test_bound_values_are_not_reinterpreted():
    assert render_template("{a}", {"a": "{b}"}) == "{b}"


@pytest.mark.parametrize(
    "text, pos",
    [
        ("open {", 5),
        ("close }", 6),
        ("{a.b}", 0),
        ("{0}", 0),
        ("{a!r}", 0),
        ("{a:>10}", 0),
        ("{}", 0),
        ("x {{ {", 5),
        ("{ a }", 0),
    ],
)
def test_unbalanced_brace_position(text, pos):
    with pytest.raises(UnbalancedBrace) as exc:
        extract_variables(text)
    assert exc.value.position == pos
