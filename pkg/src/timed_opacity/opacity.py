"""Timed opacity: enrichment, self-composition, synthesis of opaque
parameter valuations and execution times, and L/U emptiness."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Tuple

from .constraints import ConstraintSet, LinearTerm, Rational
from .errors import MissingParameterError, ModelError, UnknownVariableError
from .intervals import IntervalSet, to_intervals
from .pta import (
    INPUT,
    PTA,
    SHARED,
    ClockAtom,
    Guard,
    NotLU,
    Parameter,
    classify_lu,
    expand_discrete,
    instantiate_model,
    lu_abstraction,
    product,
    product_location_name,
)
from .symbolic import UNLIMITED, Budget, efsynth

FLAG = "b"
ABS_CLOCK = "x_abs"
ABS_PARAM = "p_abs"
FINISH = "finish"
COPY_SUFFIX = "_2"

OPAQUE = "Opaque"
NOT_OPAQUE = "NotOpaque"
INCONCLUSIVE = "Inconclusive"

EMPTY = "Empty"
NON_EMPTY = "NonEmpty"
NOT_APPLICABLE = "NotApplicable"


@dataclass(frozen=True)
class OpacityProblem:
    model: PTA
    final: str
    private: FrozenSet[str] = frozenset()  # private locations on top of those marked in the model
    bindings: Mapping[str, Rational] = field(default_factory=dict)
    projection: Optional[Tuple[str, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "private", frozenset(self.private))
        if self.final not in self.model.locations:
            raise ModelError(f"unknown final location {self.final!r}")
        for loc in self.private:
            if loc not in self.model.locations:
                raise ModelError(f"unknown private location {loc!r}")
        if self.final == self.model.initial:
            raise ModelError("the final location must differ from the initial one")
        declared = set(self.model.parameter_names)
        for name in self.bindings:
            if name not in declared:
                raise UnknownVariableError(f"unknown parameter {name!r}")

    def bound_model(self) -> PTA:
        return instantiate_model(self.model, self.bindings)

    def private_locations(self) -> FrozenSet[str]:
        return self.model.private_locations | self.private


# ---------------------------------------------------------------------------
# model transformations


def enrich(a: PTA, private: Iterable[str], final: str) -> PTA:
    """Instrument ``a`` for opacity analysis.

    A flag ``b`` records whether a private location was entered or a private
    edge was taken; a never-reset clock ``x_abs`` is compared to the fresh
    parameter ``p_abs`` on every edge entering ``final``, and such edges get
    the action ``finish``.  Edges leaving ``final`` are dropped, so durations
    are measured at the first visit of ``final``.
    """
    private = frozenset(private) | a.private_locations
    if final not in a.locations:
        raise ModelError(f"unknown final location {final!r}")
    taken = set(a.clocks) | set(a.parameter_names) | {v for v, _ in a.discrete_vars}
    for fresh in (FLAG, ABS_CLOCK, ABS_PARAM):
        if fresh in taken:
            raise ModelError(f"name collision: the model already declares {fresh!r}")
    if FINISH in a.actions:
        raise ModelError(f"name collision: the model already uses action {FINISH!r}")
    stamp = ClockAtom(ABS_CLOCK, "=", LinearTerm.var(ABS_PARAM))
    edges = []
    for e in a.edges:
        if e.source == final:
            continue
        updates = e.bool_updates
        if e.private or e.target in private:
            updates = updates + ((FLAG, True),)
        guard, action = e.guard, e.action
        if e.target == final:
            guard = Guard((stamp,) + guard.clock_atoms, guard.param_atoms, guard.bool_tests)
            action = FINISH
        edges.append(replace(e, guard=guard, action=action, bool_updates=updates))
    return replace(
        a,
        clocks=a.clocks + (ABS_CLOCK,),
        parameters=a.parameters + (Parameter(ABS_PARAM, SHARED),),
        edges=tuple(edges),
        discrete_vars=a.discrete_vars + ((FLAG, a.initial in private),),
        private_locations=private,
    ).validate()


def copy_names(a: PTA) -> Dict[str, str]:
    """Renaming applied to the second copy in the self-composition."""
    m = {x: x + COPY_SUFFIX for x in a.clocks if x != ABS_CLOCK}
    m.update({v: v + COPY_SUFFIX for v, _ in a.discrete_vars})
    m.update({p.name: p.name + COPY_SUFFIX for p in a.parameters if p.role == INPUT})
    return m


def _rename_copy(a: PTA) -> PTA:
    m = copy_names(a)
    loc = {l: l + COPY_SUFFIX for l in a.locations}
    clash = (set(m.values()) | set(loc.values())) & (
        set(a.clocks) | set(a.parameter_names) | {v for v, _ in a.discrete_vars} | set(a.locations)
    )
    if clash:
        raise ModelError(f"copy names collide with existing symbols: {', '.join(sorted(clash))}")
    edges = tuple(
        replace(
            e,
            source=loc[e.source],
            target=loc[e.target],
            guard=e.guard.rename(m),
            resets=tuple(m.get(x, x) for x in e.resets),
            bool_updates=tuple((m.get(v, v), b) for v, b in e.bool_updates),
        )
        for e in a.edges
    )
    return PTA(
        name=a.name + COPY_SUFFIX,
        locations=tuple(loc[l] for l in a.locations),
        initial=loc[a.initial],
        clocks=tuple(m[x] for x in a.clocks if x != ABS_CLOCK),
        parameters=tuple(Parameter(m[p.name], p.role) for p in a.parameters if p.role == INPUT),
        invariants={loc[k]: g.rename(m) for k, g in a.invariants.items()},
        edges=edges,
        discrete_vars=tuple((m[v], b) for v, b in a.discrete_vars),
        private_locations=frozenset(loc[l] for l in a.private_locations),
    )


def self_compose(enriched: PTA) -> PTA:
    """Product of ``enriched`` with a renamed copy, synchronized on ``finish``.

    Clocks (except ``x_abs``), booleans and input parameters are duplicated;
    shared parameters, ``p_abs`` and ``x_abs`` are common to both copies.
    """
    second = _rename_copy(enriched)
    return product([enriched, second], {FINISH}, name=enriched.name).validate()


# ---------------------------------------------------------------------------
# synthesis


@dataclass(frozen=True)
class SynthesisResult:
    constraint: ConstraintSet
    conclusive: bool
    states: int = 0

    def __str__(self) -> str:
        return str(self.constraint)


def _flag_target(x: PTA, loc: str, flags: Mapping[str, bool]):
    def test(name: str) -> bool:
        orig, bits = x.origin[name]
        if orig != loc:
            return False
        val = dict(bits)
        return all(val[k] == v for k, v in flags.items())

    return test


def synth_opacity(problem: OpacityProblem, budget: Budget = UNLIMITED, swap_goal: bool = False) -> SynthesisResult:
    """Valuations of the kept parameters and ``p_abs`` for which a run through
    the private designation and a run avoiding it both reach ``final`` at
    time ``p_abs``."""
    model = problem.bound_model()
    enriched = enrich(model, problem.private, problem.final)
    composed = expand_discrete(self_compose(enriched))
    goal = product_location_name([problem.final, problem.final + COPY_SUFFIX])
    first, second = (False, True) if swap_goal else (True, False)
    res = efsynth(composed, _flag_target(composed, goal, {FLAG: first, FLAG + COPY_SUFFIX: second}), budget)

    if problem.projection is None:
        keep = [p.name for p in model.parameters if p.role == SHARED] + [ABS_PARAM]
    else:
        keep = list(problem.projection)
        known = set(composed.parameter_names)
        for name in keep:
            if name not in known:
                raise UnknownVariableError(f"unknown parameter {name!r} in projection")
    env = res.constraint.env
    drop = [n for n in env.names if n not in keep]
    constraint = res.constraint.eliminate(drop).change_env(env.restrict(keep)).merged()
    return SynthesisResult(constraint, res.conclusive, res.states)


@dataclass(frozen=True)
class OpacityVerdict:
    status: str
    visit: IntervalSet
    avoid: IntervalSet
    opaque_times: IntervalSet
    conclusive: bool = True

    @property
    def is_opaque(self) -> bool:
        return self.status == OPAQUE


def _check_bound(model: PTA) -> None:
    free = model.timing_parameters()
    if free:
        raise MissingParameterError(f"unbound parameter(s) in clock constraints: {', '.join(free)}")


def duration_set(enriched_expanded: PTA, final: str, visited: bool, budget: Budget = UNLIMITED) -> Tuple[IntervalSet, bool]:
    """Entry times of ``final`` with the private flag equal to ``visited``."""
    res = efsynth(enriched_expanded, _flag_target(enriched_expanded, final, {FLAG: visited}), budget)
    only_abs = res.constraint.eliminate(n for n in res.constraint.env.names if n != ABS_PARAM)
    return to_intervals(only_abs, ABS_PARAM), res.conclusive


def compute_opaque_times(problem: OpacityProblem, budget: Budget = UNLIMITED) -> OpacityVerdict:
    """Duration sets of a non-parametric model and the times at which it is
    opaque.  Parameters that never bound a clock (program data) may stay
    unbound; they are quantified away per run."""
    model = problem.bound_model()
    _check_bound(model)
    enriched = expand_discrete(enrich(model, problem.private, problem.final))
    visit, ok1 = duration_set(enriched, problem.final, True, budget)
    avoid, ok2 = duration_set(enriched, problem.final, False, budget)
    opaque = visit.intersection(avoid)
    if not (ok1 and ok2):
        status = INCONCLUSIVE
    else:
        status = OPAQUE if visit == avoid else NOT_OPAQUE
    return OpacityVerdict(status, visit, avoid, opaque, ok1 and ok2)


# ---------------------------------------------------------------------------
# L/U emptiness


@dataclass(frozen=True)
class EmptinessResult:
    status: str
    witness: Optional[Dict[str, Fraction]] = None
    duration: Optional[Fraction] = None
    classification: Optional[object] = None
    verdict: Optional[OpacityVerdict] = None
    reason: str = ""


def _upper_value(model: PTA, param: str, d: Fraction) -> Fraction:
    """Smallest value at least ``d`` that makes every upper-bound comparison
    with ``param`` hold for clock values in ``[0, d]``."""
    need = d
    guards = list(model.invariants.values()) + [e.guard for e in model.edges]
    for g in guards:
        for c in g.clock_atoms:
            alpha = c.bound.coeff(param)
            if not alpha:
                continue
            if c.rel in ("<", "<=") and alpha > 0:
                need = max(need, (d - c.bound.const) / alpha + 1)
            elif c.rel in (">", ">=") and alpha < 0:
                need = max(need, c.bound.const / -alpha + 1)
    return need


def lu_emptiness(problem: OpacityProblem, budget: Budget = UNLIMITED) -> EmptinessResult:
    """Decide whether some parameter valuation makes the model opaque for at
    least one execution time, by analysing the L/U abstraction."""
    model = problem.bound_model()
    cls = classify_lu(model)
    if isinstance(cls, NotLU):
        reason = f"parameter {cls.parameter} is used as a lower bound ({cls.lower_use}) and as an upper bound ({cls.upper_use})"
        return EmptinessResult(NOT_APPLICABLE, classification=cls, reason=reason)
    try:
        abstract = lu_abstraction(model, cls)
    except ModelError as exc:
        return EmptinessResult(NOT_APPLICABLE, classification=cls, reason=str(exc))
    verdict = compute_opaque_times(
        OpacityProblem(abstract, problem.final, problem.private),
        budget,
    )
    if verdict.opaque_times.is_empty():
        status = EMPTY if verdict.conclusive else INCONCLUSIVE
        return EmptinessResult(status, classification=cls, verdict=verdict)
    d = verdict.opaque_times.pick()
    timing = model.timing_parameters()
    witness: Dict[str, Fraction] = {}
    for p in timing:
        witness[p] = Fraction(0) if p in cls.lower else _upper_value(model, p, d)
    return EmptinessResult(NON_EMPTY, witness, d, cls, verdict)
