"""Concrete semantics of instantiated timed automata and a brute-force,
grid-based explorer of run durations.

The explorer never uses the symbolic engine or the enrichment construction,
so it serves as an independent check of both.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from .constraints import Rational, as_fraction
from .errors import MissingParameterError, OpacityError
from .pta import PTA, Edge, Guard, expand_discrete

INVARIANT_VIOLATED = "invariant-violated"
GUARD_UNSATISFIED = "guard-unsatisfied"


class StepRejected(OpacityError):
    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


@dataclass(frozen=True)
class ConcreteState:
    location: str
    clocks: Tuple[Tuple[str, Fraction], ...]
    bools: Tuple[Tuple[str, bool], ...] = ()

    def clock(self, name: str) -> Fraction:
        return dict(self.clocks)[name]

    def __str__(self) -> str:
        vals = ", ".join(f"{x}={v}" for x, v in self.clocks)
        return f"({self.location}, {vals})"


@dataclass(frozen=True)
class Run:
    states: Tuple[ConcreteState, ...]
    steps: Tuple[Tuple[int, Fraction], ...] = ()  # (edge index, delay)

    @property
    def final_state(self) -> ConcreteState:
        return self.states[-1]


def run_duration(r: Run) -> Fraction:
    return sum((d for _, d in r.steps), Fraction(0))


def initial_concrete(a: PTA) -> ConcreteState:
    s = ConcreteState(a.initial, tuple((x, Fraction(0)) for x in a.clocks), tuple(a.discrete_vars))
    if not _clock_part_holds(a.invariant(a.initial), dict(s.clocks)):
        raise StepRejected(INVARIANT_VIOLATED, f"initial invariant of {a.initial} excludes time 0")
    return s


def _clock_part_holds(g: Guard, clocks: Mapping[str, Fraction]) -> bool:
    for c in g.clock_atoms:
        if c.bound.coeffs:
            raise MissingParameterError(f"clock bound {c} still mentions parameters")
        diff = clocks[c.clock] - c.bound.const
        if not _rel(diff, c.rel):
            return False
    return True


def _rel(v: Fraction, rel: str) -> bool:
    return {"<": v < 0, "<=": v <= 0, "=": v == 0, ">=": v >= 0, ">": v > 0}[rel]


def _guard_holds(g: Guard, clocks: Mapping[str, Fraction], bools: Mapping[str, bool]) -> bool:
    if not _clock_part_holds(g, clocks):
        return False
    for a in g.param_atoms:
        if a.term.coeffs:
            raise MissingParameterError(f"guard {a} still mentions parameters")
        if not _rel(a.term.const, a.rel):
            return False
    return all(bools[v] == want for v, want in g.bool_tests)


def step(a: PTA, s: ConcreteState, e: Edge, d: Rational) -> ConcreteState:
    """Delay ``d`` in the current location, then take ``e``.

    Invariants are conjunctions of clock bounds, hence convex, so checking the
    source invariant at both ends of the delay suffices.
    """
    d = as_fraction(d)
    if d < 0:
        raise ValueError("negative delay")
    if e.source != s.location:
        raise ValueError(f"edge leaves {e.source!r}, state is at {s.location!r}")
    clocks = {x: v + d for x, v in s.clocks}
    bools = dict(s.bools)
    if not _clock_part_holds(a.invariant(s.location), clocks):
        raise StepRejected(INVARIANT_VIOLATED, f"invariant of {s.location} fails after delay {d}")
    if not _guard_holds(e.guard, clocks, bools):
        raise StepRejected(GUARD_UNSATISFIED, f"guard of {e} fails after delay {d}")
    for x in e.resets:
        clocks[x] = Fraction(0)
    for v, b in e.bool_updates:
        bools[v] = b
    if not _clock_part_holds(a.invariant(e.target), clocks):
        raise StepRejected(INVARIANT_VIOLATED, f"invariant of {e.target} fails on arrival")
    return ConcreteState(e.target, tuple((x, clocks[x]) for x, _ in s.clocks), tuple((v, bools[v]) for v, _ in s.bools))


def replay(a: PTA, r: Run) -> bool:
    """Whether the edge/delay sequence of ``r`` is executable in ``a``."""
    try:
        s = initial_concrete(a)
        for k, d in r.steps:
            s = step(a, s, a.edges[k], d)
    except (StepRejected, IndexError, ValueError):
        return False
    return True


@dataclass
class OracleResult:
    visit_durations: FrozenSet[Fraction]
    avoid_durations: FrozenSet[Fraction]
    exhausted: bool
    witnesses: Dict[Tuple[bool, Fraction], Run] = field(default_factory=dict, repr=False)


def _delay_window(g: Guard, clocks: Mapping[str, Fraction]):
    """Delays ``d >= 0`` for which the clock bounds of ``g`` hold at clocks+d:
    returns (lo, lo_strict, hi, hi_strict) or None when empty."""
    lo, lo_strict = Fraction(0), False
    hi: Optional[Fraction] = None
    hi_strict = False
    for c in g.clock_atoms:
        if c.bound.coeffs:
            raise MissingParameterError(f"clock bound {c} still mentions parameters")
        b = c.bound.const - clocks[c.clock]
        if c.rel in (">", ">=", "="):
            s = c.rel == ">"
            if b > lo or (b == lo and s):
                lo, lo_strict = b, s
        if c.rel in ("<", "<=", "="):
            s = c.rel == "<"
            if hi is None or b < hi or (b == hi and s):
                hi, hi_strict = b, s
    if hi is not None and (hi < lo or (hi == lo and (lo_strict or hi_strict))):
        return None
    return lo, lo_strict, hi, hi_strict


def _grid_points(window, grid: int, cap: Fraction) -> List[Fraction]:
    lo, lo_strict, hi, hi_strict = window
    k0 = ceil(lo * grid)
    if lo_strict and Fraction(k0, grid) == lo:
        k0 += 1
    top = cap if hi is None or hi > cap else hi
    k1 = floor(top * grid)
    if hi is not None and top == hi and hi_strict and Fraction(k1, grid) == hi:
        k1 -= 1
    return [Fraction(k, grid) for k in range(max(k0, 0), k1 + 1)]


def largest_constant(a: PTA) -> Fraction:
    best = Fraction(0)
    for g in list(a.invariants.values()) + [e.guard for e in a.edges]:
        for c in g.clock_atoms:
            best = max(best, abs(c.bound.const))
    return best


def explore_durations(
    a: PTA,
    private: Iterable[str],
    final: str,
    grid_denominator: int = 2,
    time_bound: Optional[Rational] = None,
    step_bound: Optional[int] = None,
) -> OracleResult:
    """Enumerate runs whose delays are multiples of ``1/grid_denominator`` and
    file the duration of each first arrival at ``final`` by whether a private
    location was entered (or a private edge taken) on the way."""
    if grid_denominator <= 0:
        raise ValueError("grid denominator must be positive")
    private = frozenset(private) | a.private_locations
    bound = as_fraction(time_bound) if time_bound is not None else 2 * largest_constant(a)
    if step_bound is None:
        step_bound = 4 * len(expand_discrete(a).locations)
    visit: Dict[Fraction, Run] = {}
    avoid: Dict[Fraction, Run] = {}
    exhausted = True
    try:
        s0 = initial_concrete(a)
    except StepRejected:
        return OracleResult(frozenset(), frozenset(), True)
    start = (s0, Fraction(0), a.initial in private)
    if a.initial == final:
        (visit if start[2] else avoid)[Fraction(0)] = Run((s0,))
        return OracleResult(frozenset(visit), frozenset(avoid), True, _witnesses(visit, avoid))
    parent: Dict[tuple, Optional[Tuple[tuple, int, Fraction]]] = {start: None}
    queue = deque([(start, 0)])
    out = {loc: [(k, e) for k, e in enumerate(a.edges) if e.source == loc] for loc in a.locations}

    def run_of(cfg: tuple) -> Run:
        states, steps = [], []
        while cfg is not None:
            states.append(cfg[0])
            link = parent[cfg]
            if link is None:
                break
            prev, k, d = link
            steps.append((k, d))
            cfg = prev
        return Run(tuple(reversed(states)), tuple(reversed(steps)))

    while queue:
        cfg, depth = queue.popleft()
        s, elapsed, seen_private = cfg
        clocks = dict(s.clocks)
        bools = dict(s.bools)
        inv = a.invariant(s.location)
        for k, e in out[s.location]:
            if any(bools[v] != want for v, want in e.guard.bool_tests):
                continue
            window = _delay_window(inv & Guard(e.guard.clock_atoms), clocks)
            if window is None:
                continue
            for d in _grid_points(window, grid_denominator, bound - elapsed):
                try:
                    nxt = step(a, s, e, d)
                except StepRejected:
                    continue
                if depth >= step_bound:
                    exhausted = False
                    break
                flag = seen_private or e.private or e.target in private
                ncfg = (nxt, elapsed + d, flag)
                if ncfg in parent:
                    continue
                parent[ncfg] = (cfg, k, d)
                if e.target == final:
                    book = visit if flag else avoid
                    book.setdefault(elapsed + d, None)
                    if book[elapsed + d] is None:
                        book[elapsed + d] = run_of(ncfg)
                    continue
                queue.append((ncfg, depth + 1))
    return OracleResult(frozenset(visit), frozenset(avoid), exhausted, _witnesses(visit, avoid))


def _witnesses(visit: Dict[Fraction, Run], avoid: Dict[Fraction, Run]) -> Dict[Tuple[bool, Fraction], Run]:
    w = {(True, d): r for d, r in visit.items()}
    w.update({(False, d): r for d, r in avoid.items()})
    return w
