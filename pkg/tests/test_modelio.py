from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from timed_opacity.constraints import Atom, LinearTerm
from timed_opacity.errors import ParseError
from timed_opacity.modelio import format_number, load, parse, serialize
from timed_opacity.pta import INPUT, PTA, SHARED, ClockAtom, Edge, Guard, Parameter

from conftest import FIXTURES


@pytest.mark.parametrize("name", ["fig1", "fig3", "two_branch"])
def test_fixture_round_trip(name):
    m = load(FIXTURES / f"{name}.pta")
    text = serialize(m.pta, m.final)
    again = parse(text)
    assert again.pta == m.pta
    assert again.final == m.final
    assert serialize(again.pta, again.final) == text


def test_fig1_contents(fig1):
    assert fig1.locations == ("l0", "l1", "l2")
    assert fig1.clocks == ("x",)
    assert fig1.parameter_names == ("p1", "p2")
    assert fig1.private_locations == {"l2"}
    assert str(fig1.invariant("l0")) == "x <= 3"


def test_fig3_contents(fig3):
    assert len(fig3.locations) == 8
    assert {p.name: p.role for p in fig3.parameters} == {"eps": SHARED, "p": SHARED, "x": INPUT, "secret": SHARED}
    guards = {str(e.guard) for e in fig3.edges}
    assert "cl >= 1024*p && cl <= eps + 1024*p" in guards


def test_two_branch_private_edge(two_branch):
    (priv,) = [e for e in two_branch.edges if e.private]
    assert str(priv.guard) == "cl > 30 && h > 0"


def test_format_number():
    assert format_number(Fraction(1002, 1000)) == "1.002"
    assert format_number(Fraction(1, 3)) == "1/3"
    assert format_number(Fraction(-5, 2)) == "-2.5"
    assert format_number(Fraction(7)) == "7"


def test_expression_forms():
    m = parse("pta m\nclock c;\nparam p;\nautomaton m { init loc a { when c <= 2^3*p + 1/2 && 2*c == (p + 1) goto a; } }")
    (e,) = m.pta.edges
    assert [str(a) for a in e.guard.clock_atoms] == ["c <= 8*p + 1/2", "c = 1/2*p + 1/2"]


def test_quoted_names_and_bytes():
    m = parse(b'pta "my model"\nclock c;\nautomaton "A B" { init loc "start here" { when c > 1 goto "start here"; } }')
    assert m.pta.name == "my model"
    assert m.pta.locations == ("start here",)
    assert parse(serialize(m.pta)).pta == m.pta


def test_multi_automaton_sync():
    text = """pta sys
clock x, y;
sync go;
automaton A { init loc a0 { when x >= 1 sync go goto a1; } loc a1 { } }
automaton B { init loc b0 { when y <= 2 sync go do y := 0 goto b1; when true sync tick goto b0; } loc b1 { } }
"""
    m = parse(text)
    assert len(m.components) == 2
    assert m.components[0].clocks == ("x",) and m.components[1].clocks == ("y",)
    joint = [e for e in m.pta.edges if e.action == "go"]
    assert len(joint) == 1 and str(joint[0].guard) == "x >= 1 && y <= 2"
    assert joint[0].resets == ("y",)


def test_parameter_only_atoms_produce_notes():
    m = parse("pta m\nclock c;\nparam h;\nautomaton m { init loc a { when h > 0 goto a; } }")
    assert len(m.notes) == 1 and m.notes[0].startswith("4:")


def _err(text: str) -> ParseError:
    with pytest.raises(ParseError) as info:
        parse(text, source="t.pta")
    return info.value


def test_diagnostic_position():
    e = _err("pta m\nclock c;\nautomaton m {\n  init loc a { when c >= q goto a; }\n}")
    assert (e.line, e.column) == (4, 26)
    assert "undeclared identifier 'q'" in str(e)
    assert str(e).startswith("t.pta:4:26:")


def test_duplicate_declaration():
    e = _err("pta m\nclock c;\nparam c;\nautomaton m { init loc a { } }")
    assert (e.line, e.column) == (3, 7)
    assert "duplicate declaration" in e.message


def test_clock_clock_comparison_rejected():
    e = _err("pta m\nclock c, d;\nautomaton m { init loc a { when c <= d goto a; } }")
    assert e.line == 3 and "only one clock" in e.message


@pytest.mark.parametrize("text,fragment", [
    ("", "expected 'pta'"),
    ("pta m\nclock c;", "expected 'automaton'"),
    ("pta m\nautomaton m { loc a { } }", "no initial location"),
    ("pta m\nautomaton m { init loc a { when true goto b; } }", "unknown location 'b'"),
    ("pta m\nclock c;\nautomaton m { init loc a { when true do c := 1 goto a; } }", "reset to 0"),
    ("pta m\nclock c;\nparam p;\nautomaton m { init loc a { when c*p >= 1 goto a; } }", "not linear"),
    ("pta m\nclock c;\nautomaton m { init loc a : invariant c >= 1/0 { } }", "division by zero"),
    ("pta m\nautomaton m { init final loc a { } final loc b { } }", "several locations"),
    ("pta m\nautomaton m { init loc a { } loc a { } }", "duplicate location"),
    ("pta m\nclock c;\nautomaton m { init loc a { when c >= 2^99 goto a; } }", "exponent too large"),
])
def test_parse_errors(text, fragment):
    assert fragment in _err(text).message


# ---------------------------------------------------------------------------
# generated models

coef = st.integers(-3, 3)
consts = st.sampled_from([Fraction(k, d) for k in range(0, 10) for d in (1, 2, 3)])
LOCS = ("l0", "l1", "l2")


@st.composite
def bounds(draw):
    return LinearTerm.of({"p": draw(coef), "q": draw(st.integers(0, 2))}, draw(consts))


@st.composite
def guards(draw, allow_params=True):
    atoms = tuple(
        ClockAtom(draw(st.sampled_from(["x", "y"])), draw(st.sampled_from(["<", "<=", "=", ">=", ">"])), draw(bounds()))
        for _ in range(draw(st.integers(0, 2)))
    )
    patoms = ()
    tests = ()
    if allow_params:
        if draw(st.booleans()):
            patoms = (Atom(LinearTerm.of({"p": 1}, -draw(consts)), draw(st.sampled_from([">", ">=", "="]))),)
        if draw(st.booleans()):
            tests = (("b", draw(st.booleans())),)
    return Guard(atoms, patoms, tests)


@st.composite
def edges(draw):
    return Edge(
        draw(st.sampled_from(LOCS)),
        draw(st.sampled_from(LOCS)),
        draw(guards()),
        draw(st.sampled_from([None, "a", "finish"])),
        tuple(draw(st.lists(st.sampled_from(["x", "y"]), unique=True, max_size=2))),
        tuple(("b", v) for v in draw(st.lists(st.booleans(), max_size=1))),
        draw(st.booleans()),
    )


@st.composite
def models(draw):
    invs = {}
    for loc in LOCS:
        if draw(st.booleans()):
            g = draw(guards(allow_params=False))
            invs[loc] = g
    return PTA(
        "gen",
        LOCS,
        "l0",
        ("x", "y"),
        (Parameter("p"), Parameter("q", draw(st.sampled_from([SHARED, INPUT])))),
        invs,
        tuple(draw(st.lists(edges(), max_size=6))),
        (("b", draw(st.booleans())),),
        frozenset(draw(st.sets(st.sampled_from(LOCS)))),
    )


@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(models(), st.sampled_from((None,) + LOCS))
def test_generated_round_trip(a, final):
    text = serialize(a, final)
    m = parse(text)
    assert m.pta == a
    assert m.final == final
    assert serialize(m.pta, m.final) == text


@settings(max_examples=300, deadline=None)
@given(st.one_of(st.binary(max_size=200), st.text(max_size=200)))
def test_fuzz_only_parse_errors(data):
    try:
        parse(data)
    except ParseError:
        pass


keywords = st.sampled_from(
    "pta clock param bool sync automaton init private final loc invariant when do goto true false "
    "x p b a l0 ; , : { } ( ) := && <= >= == < > = + - * / ^ ! 0 1 2.5 \"s\"".split()
)


@settings(max_examples=300, deadline=None)
@given(st.lists(keywords, max_size=40))
def test_fuzz_token_soup(tokens):
    text = "pta m\nclock x;\nparam p;\nbool b = true;\n" + " ".join(tokens)
    try:
        parse(text)
    except ParseError as e:
        assert e.line >= 1 and e.column >= 1
