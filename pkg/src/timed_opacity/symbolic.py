"""Parametric zone graph and reachability synthesis (EFsynth)."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Tuple, Union

from .constraints import (
    ConstraintSet,
    Polyhedron,
    change_env,
    conjoin,
    eq,
    includes,
    project_params,
    reset,
    time_elapse,
)
from .errors import ModelError
from .pta import PTA, Edge, Guard


@dataclass(frozen=True)
class SymbolicState:
    location: str
    zone: Polyhedron

    def __str__(self) -> str:
        return f"{self.location} | {self.zone}"


@dataclass(frozen=True)
class Budget:
    """Exploration limits; ``None`` means unlimited."""

    max_depth: Optional[int] = None
    max_states: Optional[int] = None

    def __post_init__(self) -> None:
        for name in ("max_depth", "max_states"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")


UNLIMITED = Budget()

Targets = Union[Iterable[str], Callable[[str], bool]]


def _require_expanded(a: PTA) -> None:
    if a.discrete_vars:
        raise ModelError("expand discrete variables before symbolic exploration")


def _conj(zone: Polyhedron, g: Guard) -> Polyhedron:
    if g.bool_tests:
        raise ModelError("guard still tests boolean variables")
    if not g.clock_atoms and not g.param_atoms:
        return zone
    return conjoin(zone, g.atoms())


def initial_state(a: PTA) -> SymbolicState:
    _require_expanded(a)
    env = a.env()
    zero = Polyhedron.from_atoms(env, [eq(x, 0) for x in a.clocks])
    zone = _conj(time_elapse(zero), a.invariant(a.initial))
    if zone.empty:
        raise ModelError(f"the invariant of initial location {a.initial!r} excludes time 0")
    return SymbolicState(a.initial, zone)


def successor(a: PTA, s: SymbolicState, e: Edge) -> Optional[SymbolicState]:
    """``(l', elapse([C and g]_R and I(l')) and I(l'))`` or ``None`` if empty."""
    if e.source != s.location:
        raise ValueError(f"edge leaves {e.source!r}, state is at {s.location!r}")
    z = _conj(s.zone, e.guard)
    if z.empty:
        return None
    z = reset(z, e.resets)
    inv = a.invariant(e.target)
    z = _conj(z, inv)
    if z.empty:
        return None
    z = _conj(time_elapse(z), inv)
    if z.empty:
        return None
    return SymbolicState(e.target, z)


@dataclass
class ZoneGraph:
    states: List[SymbolicState]
    transitions: List[Tuple[int, int, int]]  # (source state, edge index, target state)
    initial: int = 0
    complete: bool = True
    edges: Tuple[Edge, ...] = ()

    def dump(self) -> str:
        lines = []
        for i, s in enumerate(self.states):
            lines.append(f"state {i}: {s.location} | {s.zone}")
        for src, k, tgt in self.transitions:
            e = self.edges[k]
            lines.append(f"transition {src} -> {tgt} via edge {k} ({e.source} -> {e.target})")
        lines.append(f"complete: {'yes' if self.complete else 'no'}")
        return "\n".join(lines) + "\n"


@dataclass
class SynthResult:
    constraint: ConstraintSet
    conclusive: bool
    states: int = 0
    graph: Optional[ZoneGraph] = field(default=None, repr=False)


def _target_test(a: PTA, targets: Targets) -> Callable[[str], bool]:
    if callable(targets):
        return targets
    wanted = set(targets)
    for t in wanted:
        if t not in a.locations:
            raise ModelError(f"unknown target location {t!r}")
    return wanted.__contains__


def _explore(a: PTA, is_target: Callable[[str], bool], budget: Budget, subsumption: bool, record: bool):
    _require_expanded(a)
    param_env = a.env().restrict(a.parameter_names)
    result = ConstraintSet.false(param_env)
    init = initial_state(a)
    states = [init]
    by_loc: Dict[str, List[int]] = {init.location: [0]}
    transitions: List[Tuple[int, int, int]] = []
    edge_index = {id(e): k for k, e in enumerate(a.edges)}
    out = {loc: a.outgoing(loc) for loc in a.locations}
    queue = deque([(0, 0)])
    conclusive = True

    def record_target(s: SymbolicState) -> None:
        nonlocal result
        result = result.add(change_env(project_params(s.zone), param_env))

    if is_target(init.location):
        record_target(init)
        queue.clear()
    while queue:
        idx, depth = queue.popleft()
        s = states[idx]
        if budget.max_depth is not None and depth >= budget.max_depth:
            if any(successor(a, s, e) is not None for e in out[s.location]):
                conclusive = False
            continue
        for e in out[s.location]:
            nxt = successor(a, s, e)
            if nxt is None:
                continue
            found = None
            if subsumption:
                for j in by_loc.get(nxt.location, ()):
                    if includes(states[j].zone, nxt.zone):
                        found = j
                        break
            else:
                for j in by_loc.get(nxt.location, ()):
                    if states[j].zone == nxt.zone:
                        found = j
                        break
            if found is not None:
                if record:
                    transitions.append((idx, edge_index[id(e)], found))
                continue
            if budget.max_states is not None and len(states) >= budget.max_states:
                conclusive = False
                queue.clear()
                break
            states.append(nxt)
            j = len(states) - 1
            by_loc.setdefault(nxt.location, []).append(j)
            if record:
                transitions.append((idx, edge_index[id(e)], j))
            if is_target(nxt.location):
                record_target(nxt)
            else:
                queue.append((j, depth + 1))
    graph = ZoneGraph(states, transitions, 0, conclusive, a.edges) if record else None
    return result, conclusive, len(states), graph


def explore(a: PTA, budget: Budget = UNLIMITED, subsumption: bool = True) -> ZoneGraph:
    """Build the (subsumption-reduced) parametric zone graph."""
    _, _, _, graph = _explore(a, lambda _loc: False, budget, subsumption, True)
    return graph


def efsynth(a: PTA, targets: Targets, budget: Budget = UNLIMITED, subsumption: bool = True) -> SynthResult:
    """Parameter valuations for which some target location is reachable.

    Target states are recorded and not expanded further.  When the budget
    cuts the exploration short the result is an under-approximation and
    ``conclusive`` is false.
    """
    test = _target_test(a, targets)
    result, conclusive, n, _ = _explore(a, test, budget, subsumption, False)
    return SynthResult(result, conclusive, n)
