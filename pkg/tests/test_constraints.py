from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from lp_oracle import lp_satisfiable
from timed_opacity.constraints import (
    Atom,
    ConstraintSet,
    LinearTerm,
    Polyhedron,
    VarEnv,
    conjoin,
    eliminate,
    eq,
    equivalent,
    ge,
    gt,
    includes,
    instantiate,
    is_satisfiable,
    le,
    lt,
    project_params,
    reset,
    set_intersection,
    set_is_empty,
    set_union,
    time_elapse,
)
from timed_opacity.errors import MissingParameterError, MultiVariableError, UnknownVariableError
from timed_opacity.intervals import to_intervals

ENV = VarEnv.of(["x"], ["p1", "p2"])
ENV2 = VarEnv.of(["x", "y"], ["p", "q"])
x, p1, p2 = (LinearTerm.var(n) for n in ("x", "p1", "p2"))


def poly(env, *atoms):
    return Polyhedron.from_atoms(env, atoms)


# ---------------------------------------------------------------------------
# examples


def test_conjoin_with_universe():
    assert conjoin(Polyhedron.universe(ENV), [ge("x", 0)]) == Polyhedron.universe(ENV)
    assert str(conjoin(Polyhedron.universe(ENV), [ge("x", 1)])) == "x >= 1"


def test_conjoin_contradiction_is_canonical_empty():
    c = conjoin(poly(ENV, ge("x", 1)), [le("x", 0)])
    assert c.empty and c == Polyhedron.bottom(ENV)
    assert str(c) == "false"


def test_conjoin_keeps_atoms_and_implies_bound():
    c = conjoin(poly(ENV, ge("x", "p1")), [le("x", 3)])
    assert str(c) == "x <= 3 AND x >= p1"
    assert includes(poly(ENV, le("p1", 3)), c)


def test_conjoin_unknown_variable():
    with pytest.raises(UnknownVariableError):
        conjoin(Polyhedron.universe(ENV), [ge("z", 0)])


def test_is_satisfiable_examples():
    assert not is_satisfiable(poly(ENV, ge("x", 1), le("x", 0)))
    assert is_satisfiable(poly(ENV, ge("x", "p1"), le("x", 3)))
    assert not is_satisfiable(poly(ENV, gt("x", 0), lt("x", 0)))


def test_nonnegativity_is_implicit():
    assert not is_satisfiable(poly(ENV, lt("x", 0)))
    assert str(poly(ENV, le("x", 0))) == "x = 0"


def test_time_elapse_examples():
    env = VarEnv.of(["x", "y"], [])
    c = time_elapse(poly(env, eq("x", 0), eq("y", 0)))
    assert str(c) == "x = y"
    assert str(time_elapse(poly(ENV, ge("x", "p1"), le("x", 3)))) == "x >= p1 AND p1 <= 3"


def test_time_elapse_drops_upper_clock_bound():
    # p1 <= 3 stays: it is a parameter fact implied by the source zone
    c = time_elapse(poly(ENV, ge("x", "p1"), le("x", 3)))
    assert includes(poly(ENV, ge("x", "p1")), c)
    assert c.contains({"x": 100, "p1": 1, "p2": 0})


def test_reset_examples():
    env = VarEnv.of(["x", "y"], [])
    c = poly(env, eq("x", "y"))
    r = reset(c, ["x"])
    assert str(r) == "x = 0"
    assert reset(c, []) == c
    assert reset(r, ["x"]) == r


def test_eliminate_examples():
    assert str(eliminate(poly(ENV, ge("x", "p1"), le("x", 3)), ["x"])) == "p1 <= 3"
    assert eliminate(poly(ENV, eq("x", 5)), ["x"]) == Polyhedron.universe(ENV)
    env = VarEnv.of(["x"], ["p"])
    assert eliminate(poly(env, gt("x", "p"), lt("x", "p")), ["x"]).empty


def test_project_params_examples():
    s1 = poly(ENV, ge("x", "p2"), le("p2", 3))
    assert str(project_params(s1)) == "p2 <= 3"
    assert project_params(Polyhedron.universe(ENV)) == Polyhedron.universe(ENV)


def test_instantiate_examples():
    assert str(instantiate(poly(ENV, ge("x", "p1")), {"p1": 1})) == "x >= 1"
    assert instantiate(poly(ENV, le("p1", 3)), {"p1": 4}).empty
    s2 = poly(ENV, le("x", 3), ge("x", "p1"))
    out = instantiate(s2, {"p1": 1})
    assert str(out) == "x <= 3 AND x >= 1"
    assert out.env.names == ("x", "p2")


def test_instantiate_missing_parameter():
    with pytest.raises(MissingParameterError):
        instantiate(poly(ENV, ge("x", "p1")), {"p2": 1})


def test_includes_examples():
    assert includes(poly(ENV, ge("x", 0)), poly(ENV, ge("x", 1)))
    assert not includes(poly(ENV, ge("x", 1)), poly(ENV, ge("x", 0)))
    c = poly(ENV, ge("x", "p1"))
    assert includes(c, conjoin(c, [le("p2", 7)]))


def test_set_operations():
    env = VarEnv.of([], ["p_abs"])
    a = ConstraintSet.of(env, [poly(env, ge("p_abs", 1024), le("p_abs", 1029))])
    b = ConstraintSet.of(env, [poly(env, ge("p_abs", 2048), le("p_abs", 2053))])
    assert set_is_empty(set_intersection(a, b))
    assert set_intersection(a, ConstraintSet.true(env)) == a
    assert set_union(a, ConstraintSet.false(env)) == a


def test_to_intervals_examples():
    env = VarEnv.of([], ["p_abs"])
    s = ConstraintSet.of(env, [poly(env, ge("p_abs", 1), le("p_abs", 3)), poly(env, ge("p_abs", 2), le("p_abs", 3))])
    assert str(to_intervals(s)) == "[1, 3]"
    assert str(to_intervals(ConstraintSet.of(env, [poly(env, gt("p_abs", 30))]))) == "(30, inf)"
    assert to_intervals(ConstraintSet.false(env)).is_empty()


def test_to_intervals_multi_variable():
    s = ConstraintSet.of(ENV, [poly(ENV, ge("x", "p1"))])
    with pytest.raises(MultiVariableError):
        to_intervals(s)


def test_text_and_json_rendering():
    env = VarEnv.of([], ["eps", "p_abs"])
    c = poly(env, ge(5 * LinearTerm.var("eps") + 1024, "p_abs"), ge("p_abs", 1024))
    assert str(c) == "5*eps + 1024 >= p_abs AND p_abs >= 1024"
    js = c.to_json()
    assert {"coeffs": {"p_abs": "1"}, "const": "-1024", "rel": ">="} in js
    q = poly(env, ge("p_abs", Fraction(128256, 125)))
    assert str(q) == "p_abs >= 128256/125"


def test_disjunct_order_is_canonical():
    a = poly(ENV, le("p1", 3))
    b = poly(ENV, le("p2", 3))
    assert str(ConstraintSet.of(ENV, [b, a])) == str(ConstraintSet.of(ENV, [a, b])) == "p1 <= 3 OR p2 <= 3"


def test_merged_recovers_convex_union():
    env = VarEnv.of([], ["p"])
    s = ConstraintSet.of(env, [poly(env, ge("p", 0), le("p", 2)), poly(env, ge("p", 1), le("p", 3))])
    assert str(s.merged()) == "p <= 3"
    gap = ConstraintSet.of(env, [poly(env, le("p", 1)), poly(env, ge("p", 2), le("p", 3))])
    assert len(gap.merged().disjuncts) == 2


def test_float_rejected():
    with pytest.raises(TypeError):
        ge("x", 0.5)


# ---------------------------------------------------------------------------
# properties

NAMES2 = ENV2.names
coeff = st.integers(-3, 3)
REL = st.sampled_from(["<", "<=", "=", ">=", ">"])


@st.composite
def atoms(draw, env=ENV2):
    cs = {n: draw(coeff) for n in env.names}
    assume(any(cs.values()))
    return Atom(LinearTerm.of(cs, draw(st.integers(-6, 6))), draw(REL))


@st.composite
def polyhedra(draw, env=ENV2, max_atoms=4):
    return Polyhedron.from_atoms(env, draw(st.lists(atoms(env), min_size=1, max_size=max_atoms)))


grid = st.fractions(min_value=0, max_value=8, max_denominator=4)


def points(env):
    return st.fixed_dictionaries({n: grid for n in env.names})


@settings(max_examples=150, deadline=None)
@given(st.lists(atoms(), min_size=1, max_size=5))
def test_satisfiability_matches_lp(raw):
    c = Polyhedron.from_atoms(ENV2, raw)
    assert is_satisfiable(c) == lp_satisfiable(raw, NAMES2)


@settings(max_examples=100, deadline=None)
@given(st.lists(atoms(), min_size=1, max_size=4), st.sets(st.sampled_from(NAMES2), min_size=1, max_size=3), st.lists(points(ENV2), min_size=1, max_size=6))
def test_eliminate_is_exact_projection(raw, names, pts):
    c = Polyhedron.from_atoms(ENV2, raw)
    out = eliminate(c, names)
    for pt in pts:
        kept = {n: v for n, v in pt.items() if n not in names}
        assert out.contains(pt) == lp_satisfiable(raw, NAMES2, kept)


@settings(max_examples=100, deadline=None)
@given(polyhedra())
def test_canonical_form_is_equivalent_to_input(c):
    again = Polyhedron.from_atoms(ENV2, c.atoms)
    assert again == c


@settings(max_examples=100, deadline=None)
@given(st.lists(atoms(), min_size=1, max_size=4), st.lists(points(ENV2), min_size=1, max_size=6))
def test_time_elapse_matches_delay_oracle(raw, pts):
    c = Polyhedron.from_atoms(ENV2, raw)
    out = time_elapse(c)
    d = LinearTerm.var("d")
    env_d = VarEnv.of(["x", "y", "d"], ["p", "q"])
    shifted = [Atom(a.term.substitute({"x": LinearTerm.var("x") - d, "y": LinearTerm.var("y") - d}), a.rel) for a in raw]
    for pt in pts:
        # the pre-delay clock values must themselves be non-negative
        extra = [ge(LinearTerm.var("x") - d, 0), ge(LinearTerm.var("y") - d, 0)]
        assert out.contains(pt) == lp_satisfiable(shifted + extra, env_d.names, pt)


@settings(max_examples=100, deadline=None)
@given(polyhedra())
def test_time_elapse_idempotent(c):
    t = time_elapse(c)
    assert time_elapse(t) == t


@settings(max_examples=100, deadline=None)
@given(polyhedra(), st.sets(st.sampled_from(["x", "y"])), st.sets(st.sampled_from(["x", "y"])))
def test_reset_idempotent_and_composes(c, r1, r2):
    assert reset(reset(c, r1), r1) == reset(c, r1)
    assert reset(c, r1 | r2) == reset(reset(c, r1), r2)


@settings(max_examples=80, deadline=None)
@given(st.lists(atoms(), min_size=1, max_size=4), st.lists(points(ENV2), min_size=1, max_size=5))
def test_reset_matches_oracle(raw, pts):
    c = Polyhedron.from_atoms(ENV2, raw)
    out = reset(c, ["x"])
    for pt in pts:
        want = pt["x"] == 0 and lp_satisfiable(raw, NAMES2, {k: v for k, v in pt.items() if k != "x"})
        assert out.contains(pt) == want


@settings(max_examples=80, deadline=None)
@given(polyhedra(), polyhedra(), polyhedra())
def test_includes_is_a_preorder(a, b, c):
    assert includes(a, a)
    if includes(a, b) and includes(b, c):
        assert includes(a, c)
    if includes(a, b) and includes(b, a):
        assert equivalent(a, b) and a == b


@settings(max_examples=80, deadline=None)
@given(polyhedra(), polyhedra(), st.lists(points(ENV2), min_size=1, max_size=5))
def test_includes_agrees_with_points(a, b, pts):
    if includes(a, b):
        for pt in pts:
            if b.contains(pt):
                assert a.contains(pt)


@settings(max_examples=80, deadline=None)
@given(polyhedra(), st.fixed_dictionaries({"p": grid, "q": grid}))
def test_instantiate_coherent_with_satisfaction(c, v):
    inst = instantiate(c, v)
    raw = c.atoms
    assert is_satisfiable(inst) == lp_satisfiable(raw, NAMES2, v)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(grid, st.booleans(), st.one_of(st.none(), grid), st.booleans()), max_size=4))
def test_to_intervals_round_trip(raw):
    from timed_opacity.intervals import Interval, IntervalSet

    ivs = IntervalSet(Interval(lo, lc, None if hi is None else lo + hi, hc) for lo, lc, hi, hc in raw)
    env = VarEnv.of([], ["p_abs"])
    back = to_intervals(ivs.to_constraint_set(env, "p_abs"), "p_abs")
    assert back == ivs
    assert to_intervals(back.to_constraint_set(env, "p_abs"), "p_abs") == back


@settings(max_examples=60, deadline=None)
@given(st.lists(polyhedra(), max_size=3), st.lists(polyhedra(), max_size=3), st.lists(points(ENV2), min_size=1, max_size=5))
def test_set_operations_pointwise(xs, ys, pts):
    a = ConstraintSet.of(ENV2, xs)
    b = ConstraintSet.of(ENV2, ys)
    u, i = a.union(b), a.intersection(b)
    for pt in pts:
        assert u.contains(pt) == (a.contains(pt) or b.contains(pt))
        assert i.contains(pt) == (a.contains(pt) and b.contains(pt))
    assert all(not d.empty for d in u.disjuncts + i.disjuncts)
    assert a.union(b).merged().equivalent(u)
