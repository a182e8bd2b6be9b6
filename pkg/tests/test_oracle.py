from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from timed_opacity.errors import MissingParameterError
from timed_opacity.modelio import parse
from timed_opacity.oracle import (
    GUARD_UNSATISFIED,
    INVARIANT_VIOLATED,
    Run,
    StepRejected,
    explore_durations,
    initial_concrete,
    largest_constant,
    replay,
    run_duration,
    step,
)
from timed_opacity.pta import instantiate_model

F = Fraction


@pytest.fixture
def ta1(fig1):
    return instantiate_model(fig1, {"p1": 1, "p2": 2})


def edge(a, src, tgt):
    (k,) = [k for k, e in enumerate(a.edges) if e.source == src and e.target == tgt]
    return k, a.edges[k]


def test_step_through_private(ta1):
    s = initial_concrete(ta1)
    _, e = edge(ta1, "l0", "l2")
    s = step(ta1, s, e, F(3, 2))
    assert s.location == "l2" and s.clock("x") == F(3, 2)
    _, e = edge(ta1, "l2", "l1")
    s = step(ta1, s, e, 1)
    assert s.location == "l1" and s.clock("x") == F(5, 2)


def test_guard_rejection(ta1):
    _, e = edge(ta1, "l0", "l1")
    with pytest.raises(StepRejected) as info:
        step(ta1, initial_concrete(ta1), e, 1)
    assert info.value.reason == GUARD_UNSATISFIED


def test_invariant_rejection(ta1):
    _, e = edge(ta1, "l0", "l1")
    with pytest.raises(StepRejected) as info:
        step(ta1, initial_concrete(ta1), e, 4)
    assert info.value.reason == INVARIANT_VIOLATED


def test_arrival_invariant_rejection():
    a = parse("pta m\nclock c;\nautomaton m { init loc a { when c >= 5 goto b; } loc b : invariant c <= 2 { } }").pta
    with pytest.raises(StepRejected) as info:
        step(a, initial_concrete(a), a.edges[0], 5)
    assert info.value.reason == INVARIANT_VIOLATED


def test_step_needs_instantiated_model(fig1):
    k, e = edge(fig1, "l0", "l1")
    with pytest.raises(MissingParameterError):
        step(fig1, initial_concrete(fig1), e, 1)


def test_negative_delay(ta1):
    _, e = edge(ta1, "l0", "l1")
    with pytest.raises(ValueError):
        step(ta1, initial_concrete(ta1), e, -1)


def test_run_duration_and_replay(ta1):
    k1, _ = edge(ta1, "l0", "l2")
    k2, _ = edge(ta1, "l2", "l1")
    run = Run((initial_concrete(ta1),), ((k1, F(1)), (k2, F(3, 2))))
    assert run_duration(run) == F(5, 2)
    assert replay(ta1, run)
    assert not replay(ta1, Run((initial_concrete(ta1),), ((k1, F(1, 2)),)))


def test_bool_updates():
    a = parse("pta m\nclock c;\nbool f = false;\nautomaton m { init loc a { when !f do f := true goto a; when f goto b; } loc b { } }").pta
    s = step(a, initial_concrete(a), a.edges[0], 0)
    assert dict(s.bools) == {"f": True}
    with pytest.raises(StepRejected):
        step(a, s, a.edges[0], 0)
    assert step(a, s, a.edges[1], 0).location == "b"


def test_fig1_durations(ta1):
    r = explore_durations(ta1, set(), "l1", 2)
    assert sorted(r.visit_durations) == [F(k, 2) for k in range(2, 7)]
    assert sorted(r.avoid_durations) == [F(k, 2) for k in range(4, 7)]
    assert r.exhausted


def test_first_visit_stops_at_final():
    # the final location may be left and re-entered; only the first arrival counts
    a = parse("""pta m
clock c;
automaton m {
  init loc a { when c = 1 goto f; }
  loc f { when true goto p; }
  private loc p { when c = 2 goto f; }
}""").pta
    r = explore_durations(a, set(), "f", 2, 4)
    assert r.avoid_durations == {1} and not r.visit_durations


def test_private_edge_counts(two_branch):
    r = explore_durations(instantiate_model(two_branch, {"h": 1}), set(), "l2", 1, 32)
    assert min(r.visit_durations) == 31 and not r.avoid_durations
    r = explore_durations(instantiate_model(two_branch, {"h": 0}), set(), "l2", 1, 32)
    assert min(r.avoid_durations) == 0 and not r.visit_durations


def test_initial_equals_final(ta1):
    r = explore_durations(ta1, set(), "l0", 2)
    assert r.avoid_durations == {0}


def test_step_bound_marks_not_exhausted(ta1):
    assert not explore_durations(ta1, set(), "l1", 2, step_bound=1).exhausted


def test_largest_constant(fig3):
    assert largest_constant(instantiate_model(fig3, {"eps": 1, "p": 2})) == 2049


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 8), st.integers(0, 8))
def test_witnesses_replay_with_their_duration(k1, k2):
    from conftest import fixture_path
    from timed_opacity.modelio import load

    fig1 = load(fixture_path("fig1")).pta
    ta = instantiate_model(fig1, {"p1": F(k1, 2), "p2": F(k2, 2)})
    r = explore_durations(ta, set(), "l1", 2)
    for (priv, d), run in r.witnesses.items():
        assert replay(ta, run)
        assert run_duration(run) == d
        assert run.final_state.location == "l1"
        assert priv == any(s.location == "l2" for s in run.states)
