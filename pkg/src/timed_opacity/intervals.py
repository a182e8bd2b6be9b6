"""Normalized unions of rational intervals on the non-negative half line."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Tuple

from .constraints import (
    Atom,
    ConstraintSet,
    LinearTerm,
    Polyhedron,
    VarEnv,
    as_fraction,
    format_rational,
)
from .errors import MultiVariableError


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    lo_closed: bool
    hi: Optional[Fraction]  # None means unbounded
    hi_closed: bool = False

    def __post_init__(self) -> None:
        if self.hi is None and self.hi_closed:
            object.__setattr__(self, "hi_closed", False)

    @property
    def is_empty(self) -> bool:
        if self.hi is None:
            return False
        if self.lo < self.hi:
            return False
        return not (self.lo == self.hi and self.lo_closed and self.hi_closed)

    def contains(self, d) -> bool:
        d = as_fraction(d)
        if d < self.lo or (d == self.lo and not self.lo_closed):
            return False
        if self.hi is None:
            return True
        return d < self.hi or (d == self.hi and self.hi_closed)

    def __str__(self) -> str:
        left = "[" if self.lo_closed else "("
        if self.hi is None:
            return f"{left}{format_rational(self.lo)}, inf)"
        if self.lo == self.hi:
            return f"[{format_rational(self.lo)}]"
        right = "]" if self.hi_closed else ")"
        return f"{left}{format_rational(self.lo)}, {format_rational(self.hi)}{right}"

    def to_json(self) -> dict:
        return {
            "lo": format_rational(self.lo),
            "lo_closed": self.lo_closed,
            "hi": None if self.hi is None else format_rational(self.hi),
            "hi_closed": self.hi_closed,
        }


def _lo_key(iv: Interval):
    return (iv.lo, 0 if iv.lo_closed else 1)


def _hi_before(a: Interval, b: Interval) -> bool:
    """Upper end of ``a`` strictly below the upper end of ``b``."""
    if b.hi is None:
        return a.hi is not None
    if a.hi is None:
        return False
    return a.hi < b.hi or (a.hi == b.hi and not a.hi_closed and b.hi_closed)


def _touches(a: Interval, b: Interval) -> bool:
    """``a`` (which starts no later than ``b``) overlaps or abuts ``b``."""
    if a.hi is None:
        return True
    if a.hi > b.lo:
        return True
    return a.hi == b.lo and (a.hi_closed or b.lo_closed)


class IntervalSet:
    """Sorted, pairwise-disjoint, maximal intervals."""

    __slots__ = ("intervals",)

    def __init__(self, intervals: Iterable[Interval] = ()):
        items = sorted((iv for iv in intervals if not iv.is_empty), key=_lo_key)
        merged: List[Interval] = []
        for iv in items:
            if merged and _touches(merged[-1], iv):
                last = merged[-1]
                if _hi_before(last, iv):
                    merged[-1] = Interval(last.lo, last.lo_closed, iv.hi, iv.hi_closed)
            else:
                merged.append(iv)
        self.intervals: Tuple[Interval, ...] = tuple(merged)

    @classmethod
    def closed(cls, lo, hi) -> "IntervalSet":
        return cls([Interval(as_fraction(lo), True, as_fraction(hi), True)])

    def is_empty(self) -> bool:
        return not self.intervals

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, IntervalSet) and self.intervals == other.intervals

    def __hash__(self) -> int:
        return hash(self.intervals)

    def __repr__(self) -> str:
        return f"IntervalSet({str(self)})"

    def __str__(self) -> str:
        if not self.intervals:
            return "{}"
        return " U ".join(str(iv) for iv in self.intervals)

    def contains(self, d) -> bool:
        return any(iv.contains(d) for iv in self.intervals)

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for a in self.intervals:
            for b in other.intervals:
                if _lo_key(a) >= _lo_key(b):
                    lo, lo_closed = a.lo, a.lo_closed
                else:
                    lo, lo_closed = b.lo, b.lo_closed
                hi_src = a if _hi_before(a, b) else b
                out.append(Interval(lo, lo_closed, hi_src.hi, hi_src.hi_closed))
        return IntervalSet(out)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.intervals + other.intervals)

    def pick(self) -> Optional[Fraction]:
        """Some rational member (the least one when it exists)."""
        if not self.intervals:
            return None
        iv = self.intervals[0]
        if iv.lo_closed:
            return iv.lo
        if iv.hi is None:
            return iv.lo + 1
        return (iv.lo + iv.hi) / 2

    def to_json(self) -> list:
        return [iv.to_json() for iv in self.intervals]

    def to_constraint_set(self, env: VarEnv, var: str) -> ConstraintSet:
        polys = []
        for iv in self.intervals:
            v = LinearTerm.var(var)
            atoms = [Atom(v - iv.lo, ">=" if iv.lo_closed else ">")]
            if iv.hi is not None:
                atoms.append(Atom(v - iv.hi, "<=" if iv.hi_closed else "<"))
            polys.append(Polyhedron.from_atoms(env, atoms))
        return ConstraintSet.of(env, polys)


def _interval_of(p: Polyhedron, var: str) -> Interval:
    lo, lo_closed = Fraction(0), True
    hi: Optional[Fraction] = None
    hi_closed = False
    for a in p.atoms:
        names = a.term.variables
        if names != (var,):
            raise MultiVariableError(f"constraint {a} does not mention exactly {var!r}")
        k = a.term.coeff(var)
        bound = -a.term.const / k
        rel = a.rel
        if rel == "=":
            return Interval(bound, True, bound, True)
        # k*v + c >= 0 (or > 0); only >=, > appear in canonical polyhedra
        strict = rel == ">"
        if k > 0:
            if bound > lo or (bound == lo and strict):
                lo, lo_closed = bound, not strict
        else:
            if hi is None or bound < hi or (bound == hi and strict):
                hi, hi_closed = bound, not strict
    return Interval(lo, lo_closed, hi, hi_closed)


def to_intervals(s: ConstraintSet, var: Optional[str] = None) -> IntervalSet:
    """1-D view of a constraint set that constrains a single variable."""
    used = s.variables()
    if var is None:
        if len(used) > 1:
            raise MultiVariableError(f"constraint set mentions {', '.join(used)}")
        if not used:
            if s.is_empty():
                return IntervalSet()
            return IntervalSet([Interval(Fraction(0), True, None)])
        var = used[0]
    elif any(u != var for u in used):
        raise MultiVariableError(f"constraint set mentions variables other than {var!r}")
    return IntervalSet(_interval_of(p, var) for p in s.disjuncts)
