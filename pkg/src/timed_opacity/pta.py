"""Parametric timed automata: data model, instantiation, product, discrete
expansion and L/U analysis."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .constraints import Atom, LinearTerm, VarEnv, as_fraction
from .errors import ModelError, UnknownVariableError

SHARED = "shared"
INPUT = "input"
ROLES = (SHARED, INPUT)

_FLIP = {"<": ">", "<=": ">=", "=": "=", ">=": "<=", ">": "<"}


@dataclass(frozen=True)
class Parameter:
    name: str
    role: str = SHARED

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ModelError(f"parameter {self.name!r}: unknown role {self.role!r}")


@dataclass(frozen=True)
class ClockAtom:
    """``clock REL bound`` where ``bound`` only mentions parameters."""

    clock: str
    rel: str
    bound: LinearTerm

    def atom(self) -> Atom:
        return Atom(LinearTerm.var(self.clock) - self.bound, self.rel)

    def __str__(self) -> str:
        return f"{self.clock} {self.rel} {self.bound}"


def split_atom(atom: Atom, clocks: Iterable[str]) -> Union[ClockAtom, Atom]:
    """Classify a linear atom as a clock bound or a parameter-only atom.

    Raises :class:`ModelError` when two clocks appear (the guard grammar only
    compares one clock with a parametric term).
    """
    clocks = set(clocks)
    present = [n for n in atom.term.variables if n in clocks]
    if not present:
        return atom
    if len(present) > 1:
        raise ModelError(f"guard compares several clocks: {atom}")
    x = present[0]
    k = atom.term.coeff(x)
    rest = atom.term - LinearTerm.var(x, k)
    rel = atom.rel if k > 0 else _FLIP[atom.rel]
    return ClockAtom(x, rel, rest * (-1 / k))


@dataclass(frozen=True)
class Guard:
    clock_atoms: Tuple[ClockAtom, ...] = ()
    param_atoms: Tuple[Atom, ...] = ()
    bool_tests: Tuple[Tuple[str, bool], ...] = ()

    TRUE: "Guard" = None  # type: ignore[assignment]  # set below

    @classmethod
    def of(cls, atoms: Iterable[Atom] = (), clocks: Iterable[str] = (), bool_tests: Iterable[Tuple[str, bool]] = ()) -> "Guard":
        clocks = tuple(clocks)
        ca: List[ClockAtom] = []
        pa: List[Atom] = []
        for a in atoms:
            part = split_atom(a, clocks)
            (ca if isinstance(part, ClockAtom) else pa).append(part)
        return cls(tuple(ca), tuple(pa), tuple(bool_tests))

    @property
    def is_true(self) -> bool:
        return not (self.clock_atoms or self.param_atoms or self.bool_tests)

    def atoms(self) -> Tuple[Atom, ...]:
        return tuple(c.atom() for c in self.clock_atoms) + self.param_atoms

    def __and__(self, other: "Guard") -> "Guard":
        return Guard(self.clock_atoms + other.clock_atoms, self.param_atoms + other.param_atoms, self.bool_tests + other.bool_tests)

    def parameters(self) -> Tuple[str, ...]:
        names = set()
        for c in self.clock_atoms:
            names.update(c.bound.variables)
        for a in self.param_atoms:
            names.update(a.term.variables)
        return tuple(sorted(names))

    def substitute(self, values: Mapping[str, Fraction]) -> "Guard":
        ca = tuple(ClockAtom(c.clock, c.rel, c.bound.substitute(values)) for c in self.clock_atoms)
        pa = []
        for a in self.param_atoms:
            t = a.term.substitute(values)
            if not t.coeffs:
                if Atom(t, a.rel).holds({}):
                    continue
                t = LinearTerm()
                pa.append(Atom(t, ">"))  # constant false
                continue
            pa.append(Atom(t, a.rel))
        return Guard(ca, tuple(pa), self.bool_tests)

    def rename(self, mapping: Mapping[str, str]) -> "Guard":
        return Guard(
            tuple(ClockAtom(mapping.get(c.clock, c.clock), c.rel, c.bound.rename(mapping)) for c in self.clock_atoms),
            tuple(Atom(a.term.rename(mapping), a.rel) for a in self.param_atoms),
            tuple((mapping.get(v, v), b) for v, b in self.bool_tests),
        )

    def __str__(self) -> str:
        parts = [str(c) for c in self.clock_atoms] + [str(a) for a in self.param_atoms]
        parts += [v if b else f"!{v}" for v, b in self.bool_tests]
        return " && ".join(parts) if parts else "true"


Guard.TRUE = Guard()


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    guard: Guard = Guard()
    action: Optional[str] = None
    resets: Tuple[str, ...] = ()
    bool_updates: Tuple[Tuple[str, bool], ...] = ()
    private: bool = False

    def __str__(self) -> str:
        return f"{self.source} -[{self.guard}]-> {self.target}"


@dataclass(frozen=True)
class PTA:
    name: str
    locations: Tuple[str, ...]
    initial: str
    clocks: Tuple[str, ...] = ()
    parameters: Tuple[Parameter, ...] = ()
    invariants: Mapping[str, Guard] = field(default_factory=dict)
    edges: Tuple[Edge, ...] = ()
    discrete_vars: Tuple[Tuple[str, bool], ...] = ()
    private_locations: FrozenSet[str] = frozenset()
    # expanded models only: location name -> (original location, bool valuation)
    origin: Mapping[str, Tuple[str, Tuple[Tuple[str, bool], ...]]] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        # drop trivially-true invariants so structural equality ignores them
        inv = {k: v for k, v in dict(self.invariants).items() if not v.is_true}
        object.__setattr__(self, "invariants", inv)
        object.__setattr__(self, "private_locations", frozenset(self.private_locations))
        # group edges by source in location order (stable within a location)
        rank = {loc: i for i, loc in enumerate(self.locations)}
        edges = tuple(sorted(self.edges, key=lambda e: rank.get(e.source, len(rank))))
        object.__setattr__(self, "edges", edges)

    # lookups -----------------------------------------------------------------

    @property
    def parameter_names(self) -> Tuple[str, ...]:
        return tuple(p.name for p in self.parameters)

    def parameter(self, name: str) -> Parameter:
        for p in self.parameters:
            if p.name == name:
                return p
        raise UnknownVariableError(f"unknown parameter {name!r}")

    @property
    def actions(self) -> FrozenSet[str]:
        return frozenset(e.action for e in self.edges if e.action is not None)

    def env(self) -> VarEnv:
        return VarEnv.of(self.clocks, self.parameter_names)

    def invariant(self, loc: str) -> Guard:
        return self.invariants.get(loc, Guard.TRUE)

    def outgoing(self, loc: str) -> List[Edge]:
        return [e for e in self.edges if e.source == loc]

    def timing_parameters(self) -> Tuple[str, ...]:
        """Parameters that occur in some clock bound."""
        used = set()
        for g in self._guards():
            for c in g.clock_atoms:
                used.update(c.bound.variables)
        return tuple(p for p in self.parameter_names if p in used)

    def _guards(self) -> List[Guard]:
        return list(self.invariants.values()) + [e.guard for e in self.edges]

    def uses_param_atoms(self) -> bool:
        return any(g.param_atoms for g in self._guards())

    def validate(self) -> "PTA":
        locs = set(self.locations)
        if len(locs) != len(self.locations):
            raise ModelError("duplicate location")
        if self.initial not in locs:
            raise ModelError(f"initial location {self.initial!r} is not declared")
        names = list(self.clocks) + list(self.parameter_names) + [v for v, _ in self.discrete_vars]
        seen = set()
        for n in names:
            if n in seen:
                raise ModelError(f"symbol {n!r} declared twice")
            seen.add(n)
        clocks = set(self.clocks)
        params = set(self.parameter_names)
        bools = {v for v, _ in self.discrete_vars}

        def check_guard(g: Guard, where: str, invariant: bool = False) -> None:
            for c in g.clock_atoms:
                if c.clock not in clocks:
                    raise ModelError(f"{where}: unknown clock {c.clock!r}")
                for p in c.bound.variables:
                    if p not in params:
                        raise ModelError(f"{where}: unknown parameter {p!r}")
            for a in g.param_atoms:
                for p in a.term.variables:
                    if p not in params:
                        raise ModelError(f"{where}: unknown parameter {p!r}")
            for v, _ in g.bool_tests:
                if v not in bools:
                    raise ModelError(f"{where}: unknown boolean {v!r}")
            if invariant and (g.param_atoms or g.bool_tests):
                raise ModelError(f"{where}: invariants may only bound clocks")

        for loc, g in self.invariants.items():
            if loc not in locs:
                raise ModelError(f"invariant for unknown location {loc!r}")
            check_guard(g, f"invariant of {loc}", invariant=True)
        for e in self.edges:
            if e.source not in locs or e.target not in locs:
                raise ModelError(f"edge {e.source}->{e.target}: unknown location")
            check_guard(e.guard, f"edge {e.source}->{e.target}")
            for x in e.resets:
                if x not in clocks:
                    raise ModelError(f"edge {e.source}->{e.target}: reset of unknown clock {x!r}")
            for v, _ in e.bool_updates:
                if v not in bools:
                    raise ModelError(f"edge {e.source}->{e.target}: unknown boolean {v!r}")
        for loc in self.private_locations:
            if loc not in locs:
                raise ModelError(f"unknown private location {loc!r}")
        return self


# ---------------------------------------------------------------------------
# instantiation


def instantiate_model(a: PTA, valuation: Mapping[str, Union[int, str, Fraction]]) -> PTA:
    """Replace the named parameters by constants everywhere."""
    values = {}
    declared = set(a.parameter_names)
    for name, v in valuation.items():
        if name not in declared:
            raise UnknownVariableError(f"unknown parameter {name!r}")
        q = as_fraction(v)
        if q < 0:
            raise ModelError(f"parameter {name!r} must be non-negative")
        values[name] = q
    if not values:
        return a
    return replace(
        a,
        parameters=tuple(p for p in a.parameters if p.name not in values),
        invariants={k: g.substitute(values) for k, g in a.invariants.items()},
        edges=tuple(replace(e, guard=e.guard.substitute(values)) for e in a.edges),
    )


# ---------------------------------------------------------------------------
# synchronized product


def product_location_name(parts: Sequence[str]) -> str:
    return parts[0] if len(parts) == 1 else "__".join(parts)


def product(components: Sequence[PTA], sync: Iterable[str] = (), name: Optional[str] = None) -> PTA:
    """Synchronized product: actions in ``sync`` fire jointly in every component
    whose alphabet has them, all other actions interleave."""
    comps = list(components)
    if not comps:
        raise ModelError("product of no components")
    sync = frozenset(sync)
    seen: Dict[str, int] = {}
    for i, c in enumerate(comps):
        for sym in list(c.clocks) + [v for v, _ in c.discrete_vars]:
            if sym in seen:
                raise ModelError(f"name collision: {sym!r} declared by components {seen[sym]} and {i}")
            seen[sym] = i
    params: List[Parameter] = []
    pnames: Dict[str, Parameter] = {}
    for c in comps:
        for p in c.parameters:
            if p.name in pnames:
                if pnames[p.name].role != p.role:
                    raise ModelError(f"parameter {p.name!r} declared with two roles")
                continue
            pnames[p.name] = p
            params.append(p)
    if len(comps) == 1 and not sync:
        return comps[0]

    alphabets = [c.actions for c in comps]
    sync_order: List[str] = []
    for c in comps:
        for e in c.edges:
            if e.action in sync and e.action not in sync_order:
                sync_order.append(e.action)
    out_by_comp = [{loc: c.outgoing(loc) for loc in c.locations} for c in comps]

    loc_tuples = list(itertools.product(*(c.locations for c in comps)))
    locations = tuple(product_location_name(t) for t in loc_tuples)
    if len(set(locations)) != len(locations):
        raise ModelError("product location names collide; rename locations")
    invariants = {}
    private = set()
    for t, nm in zip(loc_tuples, locations):
        g = Guard.TRUE
        for c, l in zip(comps, t):
            g = g & c.invariant(l)
        invariants[nm] = g
        if any(l in c.private_locations for c, l in zip(comps, t)):
            private.add(nm)

    edges: List[Edge] = []
    for t in loc_tuples:
        src = product_location_name(t)
        for i, c in enumerate(comps):
            for e in out_by_comp[i][t[i]]:
                if e.action is not None and e.action in sync:
                    continue
                tgt = list(t)
                tgt[i] = e.target
                edges.append(replace(e, source=src, target=product_location_name(tgt)))
        for act in sync_order:
            zeta = [i for i in range(len(comps)) if act in alphabets[i]]
            choices = [[e for e in out_by_comp[i][t[i]] if e.action == act] for i in zeta]
            if any(not ch for ch in choices):
                continue
            for combo in itertools.product(*choices):
                tgt = list(t)
                g = Guard.TRUE
                resets: List[str] = []
                updates: List[Tuple[str, bool]] = []
                priv = False
                for i, e in zip(zeta, combo):
                    tgt[i] = e.target
                    g = g & e.guard
                    resets.extend(x for x in e.resets if x not in resets)
                    updates.extend(e.bool_updates)
                    priv = priv or e.private
                edges.append(Edge(src, product_location_name(tgt), g, act, tuple(resets), tuple(updates), priv))

    return PTA(
        name=name or "_".join(c.name for c in comps),
        locations=locations,
        initial=product_location_name([c.initial for c in comps]),
        clocks=tuple(x for c in comps for x in c.clocks),
        parameters=tuple(params),
        invariants=invariants,
        edges=tuple(edges),
        discrete_vars=tuple(v for c in comps for v in c.discrete_vars),
        private_locations=frozenset(private),
    )


# ---------------------------------------------------------------------------
# discrete variables as locations


def expanded_name(loc: str, bits: Sequence[Tuple[str, bool]]) -> str:
    if not bits:
        return loc
    return f"{loc}[{','.join(f'{v}={int(b)}' for v, b in bits)}]"


def expand_discrete(a: PTA) -> PTA:
    """Compile boolean variables into locations reachable from the initial
    valuation (ignoring clocks)."""
    names = [v for v, _ in a.discrete_vars]
    if not names:
        return replace(a, origin={loc: (loc, ()) for loc in a.locations})
    init_bits = tuple(b for _, b in a.discrete_vars)

    def label(loc: str, bits: Tuple[bool, ...]) -> str:
        return expanded_name(loc, list(zip(names, bits)))

    start = (a.initial, init_bits)
    seen = {start: label(*start)}
    order = [start]
    queue = deque([start])
    edges: List[Edge] = []
    index = {v: i for i, v in enumerate(names)}
    while queue:
        loc, bits = queue.popleft()
        for e in a.outgoing(loc):
            if any(bits[index[v]] != want for v, want in e.guard.bool_tests):
                continue
            nb = list(bits)
            for v, val in e.bool_updates:
                nb[index[v]] = val
            key = (e.target, tuple(nb))
            if key not in seen:
                seen[key] = label(*key)
                order.append(key)
                queue.append(key)
            g = Guard(e.guard.clock_atoms, e.guard.param_atoms, ())
            edges.append(replace(e, source=seen[(loc, bits)], target=seen[key], guard=g, bool_updates=()))
    locations = tuple(seen[k] for k in order)
    origin = {seen[k]: (k[0], tuple(zip(names, k[1]))) for k in order}
    return PTA(
        name=a.name,
        locations=locations,
        initial=seen[start],
        clocks=a.clocks,
        parameters=a.parameters,
        invariants={seen[k]: a.invariant(k[0]) for k in order},
        edges=tuple(edges),
        discrete_vars=(),
        private_locations=frozenset(seen[k] for k in order if k[0] in a.private_locations),
        origin=origin,
    )


# ---------------------------------------------------------------------------
# L/U subclass


@dataclass(frozen=True)
class Occurrence:
    where: str
    constraint: str

    def __str__(self) -> str:
        return f"{self.where}: {self.constraint}"


@dataclass(frozen=True)
class LU:
    lower: FrozenSet[str]
    upper: FrozenSet[str]
    is_lu = True


@dataclass(frozen=True)
class NotLU:
    parameter: str
    lower_use: Occurrence
    upper_use: Occurrence
    is_lu = False


LUClassification = Union[LU, NotLU]


def _occurrences(a: PTA):
    for loc in a.locations:
        for c in a.invariant(loc).clock_atoms:
            yield f"invariant of {loc}", c
    for e in a.edges:
        for c in e.guard.clock_atoms:
            yield f"edge {e.source} -> {e.target}", c


def classify_lu(a: PTA) -> LUClassification:
    """Partition parameters into lower-bound and upper-bound ones.

    A parameter is an upper bound where increasing it relaxes the clock
    comparison (positive coefficient under ``<=``/``<``, negative under
    ``>=``/``>``), a lower bound where increasing it tightens it.  An
    equality uses it both ways.  Parameter-only atoms never bound clocks and
    are ignored; parameters without clock occurrences are put on the lower
    side.
    """
    lower_use: Dict[str, Occurrence] = {}
    upper_use: Dict[str, Occurrence] = {}
    for where, c in _occurrences(a):
        occ = Occurrence(where, str(c))
        for p, alpha in c.bound.coeffs:
            if c.rel == "=":
                lower_use.setdefault(p, occ)
                upper_use.setdefault(p, occ)
                continue
            relaxes = (alpha > 0) == (c.rel in ("<", "<="))
            (upper_use if relaxes else lower_use).setdefault(p, occ)
    for p in a.parameter_names:
        if p in lower_use and p in upper_use:
            return NotLU(p, lower_use[p], upper_use[p])
    upper = frozenset(p for p in a.parameter_names if p in upper_use)
    return LU(frozenset(a.parameter_names) - upper, upper)


def lu_abstraction(a: PTA, classification: LUClassification) -> PTA:
    """Lower-bound parameters become 0, clock comparisons that mention an
    upper-bound parameter are dropped.

    Parameters that never bound a clock are data and stay symbolic.
    """
    if not isinstance(classification, LU):
        raise ModelError("L/U abstraction needs an L/U classification")
    timing = set(a.timing_parameters())
    lower = {p: Fraction(0) for p in classification.lower if p in timing}
    upper = set(classification.upper)

    def abstract(g: Guard) -> Guard:
        kept = []
        for c in g.clock_atoms:
            b = c.bound.substitute(lower)
            if any(p in upper for p in b.variables):
                continue
            kept.append(ClockAtom(c.clock, c.rel, b))
        for pa in g.param_atoms:
            if any(p in timing for p in pa.term.variables):
                raise ModelError(f"cannot abstract parameter atom {pa} over timing parameters")
        return Guard(tuple(kept), g.param_atoms, g.bool_tests)

    return replace(
        a,
        parameters=tuple(p for p in a.parameters if p.name not in timing),
        invariants={k: abstract(g) for k, g in a.invariants.items()},
        edges=tuple(replace(e, guard=abstract(e.guard)) for e in a.edges),
    )
