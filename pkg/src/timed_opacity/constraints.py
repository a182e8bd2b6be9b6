"""Exact convex polyhedra over clocks and parameters, and finite unions of them.

Every variable ranges over the non-negative rationals.  That bound is part of
the theory: it is added to every decision procedure but never stored in a
polyhedron, so ``x >= 0`` never shows up in a canonical constraint.

Internally a polyhedron holds integer rows ``(a_1, ..., a_n, c)`` aligned with
its :class:`VarEnv`.  Equalities are kept in reduced row-echelon form and their
pivot variables are substituted out of the inequalities; inequalities are
either ``>= 0`` or ``> 0`` and irredundant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from . import kernels
from .errors import MissingParameterError, MultiVariableError, UnknownVariableError

Rational = Union[int, Fraction]
Row = Tuple[int, ...]
Ineq = Tuple[Row, bool]

CLOCK = "clock"
PARAMETER = "parameter"
RELATIONS = ("<", "<=", "=", ">=", ">")


def as_fraction(value: Union[int, str, Fraction]) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floating point values are not accepted; use a string or Fraction")
    return Fraction(value)


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# variables, terms, atoms


@dataclass(frozen=True)
class VarEnv:
    names: Tuple[str, ...]
    kinds: Tuple[str, ...]
    _index: Dict[str, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        if len(self.names) != len(self.kinds):
            raise ValueError("names and kinds must have the same length")
        index = {}
        for i, (name, kind) in enumerate(zip(self.names, self.kinds)):
            if name in index:
                raise ValueError(f"duplicate variable {name!r}")
            if kind not in (CLOCK, PARAMETER):
                raise ValueError(f"bad variable kind {kind!r}")
            index[name] = i
        object.__setattr__(self, "_index", index)

    @classmethod
    def of(cls, clocks: Iterable[str] = (), parameters: Iterable[str] = ()) -> "VarEnv":
        clocks = tuple(clocks)
        parameters = tuple(parameters)
        return cls(clocks + parameters, (CLOCK,) * len(clocks) + (PARAMETER,) * len(parameters))

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownVariableError(f"unknown variable {name!r}") from None

    def kind(self, name: str) -> str:
        return self.kinds[self.index(name)]

    @property
    def clocks(self) -> Tuple[str, ...]:
        return tuple(n for n, k in zip(self.names, self.kinds) if k == CLOCK)

    @property
    def parameters(self) -> Tuple[str, ...]:
        return tuple(n for n, k in zip(self.names, self.kinds) if k == PARAMETER)

    def restrict(self, keep: Iterable[str]) -> "VarEnv":
        keep = set(keep)
        pairs = [(n, k) for n, k in zip(self.names, self.kinds) if n in keep]
        return VarEnv(tuple(n for n, _ in pairs), tuple(k for _, k in pairs))


@dataclass(frozen=True)
class LinearTerm:
    """``sum(coeff * var) + const`` with exact rational coefficients."""

    coeffs: Tuple[Tuple[str, Fraction], ...] = ()
    const: Fraction = Fraction(0)

    @classmethod
    def of(cls, coeffs: Optional[Mapping[str, Rational]] = None, const: Rational = 0) -> "LinearTerm":
        items = []
        for name, value in (coeffs or {}).items():
            value = as_fraction(value)
            if value:
                items.append((name, value))
        items.sort()
        return cls(tuple(items), as_fraction(const))

    @classmethod
    def var(cls, name: str, coeff: Rational = 1) -> "LinearTerm":
        return cls.of({name: coeff})

    @classmethod
    def constant(cls, value: Rational) -> "LinearTerm":
        return cls.of(None, value)

    def as_dict(self) -> Dict[str, Fraction]:
        return dict(self.coeffs)

    def coeff(self, name: str) -> Fraction:
        return self.as_dict().get(name, Fraction(0))

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(n for n, _ in self.coeffs)

    def __add__(self, other: Union["LinearTerm", Rational]) -> "LinearTerm":
        if not isinstance(other, LinearTerm):
            return LinearTerm(self.coeffs, self.const + as_fraction(other))
        acc = self.as_dict()
        for name, value in other.coeffs:
            acc[name] = acc.get(name, Fraction(0)) + value
        return LinearTerm.of(acc, self.const + other.const)

    __radd__ = __add__

    def __neg__(self) -> "LinearTerm":
        return LinearTerm(tuple((n, -v) for n, v in self.coeffs), -self.const)

    def __sub__(self, other: Union["LinearTerm", Rational]) -> "LinearTerm":
        return self + (-other)

    def __rsub__(self, other: Rational) -> "LinearTerm":
        return (-self) + other

    def __mul__(self, k: Rational) -> "LinearTerm":
        k = as_fraction(k)
        return LinearTerm.of({n: v * k for n, v in self.coeffs}, self.const * k)

    __rmul__ = __mul__

    def substitute(self, values: Mapping[str, Union[Rational, "LinearTerm"]]) -> "LinearTerm":
        out = LinearTerm.constant(self.const)
        for name, value in self.coeffs:
            if name in values:
                repl = values[name]
                out = out + (repl * value if isinstance(repl, LinearTerm) else as_fraction(repl) * value)
            else:
                out = out + LinearTerm.var(name, value)
        return out

    def rename(self, mapping: Mapping[str, str]) -> "LinearTerm":
        return LinearTerm.of({mapping.get(n, n): v for n, v in self.coeffs}, self.const)

    def evaluate(self, valuation: Mapping[str, Rational]) -> Fraction:
        total = self.const
        for name, value in self.coeffs:
            try:
                total += value * as_fraction(valuation[name])
            except KeyError:
                raise MissingParameterError(f"no value for {name!r}") from None
        return total

    def __str__(self) -> str:
        return _render_side([(n, v) for n, v in self.coeffs], self.const) or "0"


def _compare(value: Fraction, rel: str) -> bool:
    if rel == ">=":
        return value >= 0
    if rel == ">":
        return value > 0
    if rel == "=":
        return value == 0
    if rel == "<=":
        return value <= 0
    if rel == "<":
        return value < 0
    raise ValueError(f"bad relation {rel!r}")


@dataclass(frozen=True)
class Atom:
    """``term REL 0``."""

    term: LinearTerm
    rel: str

    def __post_init__(self) -> None:
        if self.rel not in RELATIONS:
            raise ValueError(f"bad relation {self.rel!r}")

    @classmethod
    def compare(cls, lhs: Union[LinearTerm, Rational, str], rel: str, rhs: Union[LinearTerm, Rational, str]) -> "Atom":
        return cls(_as_term(lhs) - _as_term(rhs), rel)

    def holds(self, valuation: Mapping[str, Rational]) -> bool:
        return _compare(self.term.evaluate(valuation), self.rel)

    def negate(self) -> "Atom":
        flip = {"<": ">=", "<=": ">", ">=": "<", ">": "<="}
        if self.rel == "=":
            raise ValueError("the negation of an equality is not convex")
        return Atom(self.term, flip[self.rel])

    @property
    def variables(self) -> Tuple[str, ...]:
        return self.term.variables

    def __str__(self) -> str:
        return render_atom(self.term.as_dict(), self.term.const, self.rel)


def _as_term(x: Union[LinearTerm, Rational, str]) -> LinearTerm:
    if isinstance(x, LinearTerm):
        return x
    if isinstance(x, str):
        return LinearTerm.var(x)
    return LinearTerm.constant(x)


def ge(lhs, rhs) -> Atom:
    return Atom.compare(lhs, ">=", rhs)


def le(lhs, rhs) -> Atom:
    return Atom.compare(lhs, "<=", rhs)


def gt(lhs, rhs) -> Atom:
    return Atom.compare(lhs, ">", rhs)


def lt(lhs, rhs) -> Atom:
    return Atom.compare(lhs, "<", rhs)


def eq(lhs, rhs) -> Atom:
    return Atom.compare(lhs, "=", rhs)


# ---------------------------------------------------------------------------
# text rendering


def _fmt_coeff_term(name: str, coeff: Fraction) -> str:
    if coeff == 1:
        return name
    return f"{format_rational(coeff)}*{name}"


def _render_side(terms: List[Tuple[str, Fraction]], const: Fraction) -> str:
    parts = []
    for name, coeff in terms:
        piece = _fmt_coeff_term(name, abs(coeff))
        if not parts:
            parts.append(piece if coeff > 0 else f"-{piece}")
        else:
            parts.append(("+ " if coeff > 0 else "- ") + piece)
    if const:
        if not parts:
            parts.append(format_rational(const))
        else:
            parts.append(("+ " if const > 0 else "- ") + format_rational(abs(const)))
    return " ".join(parts)


_REL_TEXT = {">=": ">=", ">": ">", "=": "=", "<=": "<=", "<": "<"}
_REL_MIRROR = {">=": "<=", ">": "<", "=": "=", "<=": ">=", "<": ">"}


def render_atom(coeffs: Mapping[str, Fraction], const: Fraction, rel: str, order: Sequence[str] = ()) -> str:
    """Human-readable form of ``sum(coeffs) + const REL 0``.

    A single-variable atom reads ``var REL bound``; otherwise positive terms
    go left and negative terms right, e.g. ``5*eps + 1024 >= p_abs``.
    """
    rank = {n: i for i, n in enumerate(order)}
    items = sorted(((n, Fraction(v)) for n, v in coeffs.items() if v), key=lambda nv: (rank.get(nv[0], len(rank)), nv[0]))
    const = Fraction(const)
    if len(items) == 1:
        name, a = items[0]
        bound = -const / a
        r = rel if a > 0 else _REL_MIRROR[rel]
        return f"{name} {_REL_TEXT[r]} {format_rational(bound)}"
    if rel == "=" and items and items[0][1] < 0:
        items = [(n, -v) for n, v in items]
        const = -const
    left = [(n, v) for n, v in items if v > 0]
    right = [(n, -v) for n, v in items if v < 0]
    lconst = const if const > 0 else Fraction(0)
    rconst = -const if const < 0 else Fraction(0)
    if not left and not right:
        return f"{format_rational(const)} {rel} 0"
    return f"{_render_side(left, lconst) or '0'} {_REL_TEXT[rel]} {_render_side(right, rconst) or '0'}"


# ---------------------------------------------------------------------------
# integer-row helpers


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def _row_of(env: VarEnv, term: LinearTerm) -> Row:
    den = 1
    for _, v in term.coeffs:
        den = _lcm(den, v.denominator)
    den = _lcm(den, term.const.denominator)
    row = [0] * (len(env) + 1)
    for name, v in term.coeffs:
        row[env.index(name)] = int(v * den)
    row[-1] = int(term.const * den)
    return tuple(row)


def _neg(row: Row) -> Row:
    return tuple(-v for v in row)


def _normalize_eq(row: Row) -> Row:
    row = kernels.normalize(row)
    for v in row[:-1]:
        if v:
            return row if v > 0 else _neg(row)
    return row


def _is_const(row: Row) -> bool:
    return not any(row[:-1])


def _substitute_eq(row: Row, e: Row, j: int) -> Row:
    """Remove column ``j`` from ``row`` using equality ``e`` (``e[j] != 0``).

    The multiplier applied to ``row`` is positive, so inequalities keep their
    direction.
    """
    b = row[j]
    if not b:
        return row
    a = e[j]
    if a > 0:
        out = [a * r - b * x for r, x in zip(row, e)]
    else:
        out = [-a * r + b * x for r, x in zip(row, e)]
    return kernels.normalize(out)


def _rref(eqs: Sequence[Row]) -> Optional[List[Row]]:
    """Reduced row echelon form over the integers; ``None`` if inconsistent."""
    rows = [kernels.normalize(r) for r in eqs]
    if not rows:
        return []
    n = len(rows[0]) - 1
    out: List[Row] = []
    pivots: List[int] = []
    pending = list(rows)
    for j in range(n):
        k = next((i for i, r in enumerate(pending) if r[j]), None)
        if k is None:
            continue
        piv = pending.pop(k)
        pending = [_substitute_eq(r, piv, j) for r in pending]
        out = [_substitute_eq(r, piv, j) for r in out]
        out.append(piv)
        pivots.append(j)
    for r in pending:
        if r[-1] != 0:
            return None
    return sorted((_normalize_eq(r) for r in out), key=_row_key_eq)


def _first_nz(row: Row) -> int:
    for i, v in enumerate(row[:-1]):
        if v:
            return i
    return len(row)


def _row_key_eq(row: Row):
    return (_first_nz(row), row[:-1], 0, row[-1])


def _row_key(ineq: Ineq):
    row, strict = ineq
    return (_first_nz(row), row[:-1], 2 if strict else 1, row[-1])


@lru_cache(maxsize=1 << 18)
def _feasible(rows: Tuple[Row, ...], strict: Tuple[bool, ...], nvars: int) -> bool:
    return kernels.is_feasible(rows, strict, nvars)


def _nonneg_rows(n: int) -> List[Row]:
    rows = []
    for i in range(n):
        r = [0] * (n + 1)
        r[i] = 1
        rows.append(tuple(r))
    return rows


def _system(n: int, eqs: Sequence[Row], ineqs: Sequence[Ineq], skip_nonneg: Iterable[int] = ()) -> Tuple[List[Row], List[bool]]:
    rows: List[Row] = []
    strict: List[bool] = []
    for e in eqs:
        rows.append(e)
        strict.append(False)
        rows.append(_neg(e))
        strict.append(False)
    for r, s in ineqs:
        rows.append(r)
        strict.append(s)
    skip = set(skip_nonneg)
    for i, r in enumerate(_nonneg_rows(n)):
        if i not in skip:
            rows.append(r)
            strict.append(False)
    return rows, strict


def _feasible_sys(n: int, eqs, ineqs, extra: Sequence[Ineq] = (), skip_nonneg: Iterable[int] = ()) -> bool:
    rows, strict = _system(n, eqs, ineqs, skip_nonneg)
    for r, s in extra:
        rows.append(r)
        strict.append(s)
    order = sorted(range(len(rows)), key=lambda i: (rows[i], strict[i]))
    return _feasible(tuple(rows[i] for i in order), tuple(strict[i] for i in order), n)


def _dedupe(ineqs: Iterable[Ineq]) -> Optional[List[Ineq]]:
    """Normalize, drop tautologies, keep the tightest row per direction.

    Returns ``None`` on a constant contradiction.
    """
    table: Dict[Row, Tuple[int, bool]] = {}
    for row, s in ineqs:
        row = kernels.normalize(row)
        if _is_const(row):
            c = row[-1]
            if c < 0 or (c == 0 and s):
                return None
            continue
        key = row[:-1]
        c = row[-1]
        old = table.get(key)
        if old is None or c < old[0] or (c == old[0] and s and not old[1]):
            table[key] = (c, s)
    return [(k + (c,), s) for k, (c, s) in table.items()]


def _single_var_zero(row: Row) -> Optional[int]:
    nz = [i for i, v in enumerate(row[:-1]) if v]
    if len(nz) == 1 and row[-1] == 0:
        return nz[0]
    return None


# ---------------------------------------------------------------------------
# polyhedra


@dataclass(frozen=True)
class Polyhedron:
    """Canonical convex NNC polyhedron; build through the constructors only."""

    env: VarEnv
    eqs: Tuple[Row, ...] = ()
    ineqs: Tuple[Ineq, ...] = ()
    empty: bool = False

    # construction -----------------------------------------------------------

    @classmethod
    def universe(cls, env: VarEnv) -> "Polyhedron":
        return cls(env)

    @classmethod
    def bottom(cls, env: VarEnv) -> "Polyhedron":
        return cls(env, empty=True)

    @classmethod
    def from_atoms(cls, env: VarEnv, atoms: Iterable[Atom]) -> "Polyhedron":
        eqs, ineqs = _rows_of_atoms(env, atoms)
        return _canonical(env, tuple(eqs), tuple(ineqs))

    # views ------------------------------------------------------------------

    @property
    def atoms(self) -> Tuple[Atom, ...]:
        if self.empty:
            return (Atom(LinearTerm(), ">"),)
        out = []
        for row in self.eqs:
            out.append(Atom(self._term(row), "="))
        for row, s in self.ineqs:
            out.append(Atom(self._term(row), ">" if s else ">="))
        return tuple(out)

    def _term(self, row: Row) -> LinearTerm:
        return LinearTerm.of({self.env.names[i]: v for i, v in enumerate(row[:-1]) if v}, row[-1])

    @property
    def is_universe(self) -> bool:
        return not self.empty and not self.eqs and not self.ineqs

    def variables(self) -> Tuple[str, ...]:
        """Variables with a nonzero coefficient somewhere."""
        used = set()
        for row in self.eqs:
            used.update(i for i, v in enumerate(row[:-1]) if v)
        for row, _ in self.ineqs:
            used.update(i for i, v in enumerate(row[:-1]) if v)
        return tuple(self.env.names[i] for i in sorted(used))

    def __str__(self) -> str:
        if self.empty:
            return "false"
        if self.is_universe:
            return "true"
        parts = []
        for row in self.eqs:
            parts.append(self._render(row, "="))
        for row, s in self.ineqs:
            parts.append(self._render(row, ">" if s else ">="))
        return " AND ".join(parts)

    def _render(self, row: Row, rel: str) -> str:
        coeffs = {self.env.names[i]: Fraction(v) for i, v in enumerate(row[:-1]) if v}
        return render_atom(coeffs, Fraction(row[-1]), rel, self.env.names)

    def to_json(self) -> list:
        out = []
        for a in self.atoms:
            out.append({
                "coeffs": {n: format_rational(v) for n, v in a.term.coeffs},
                "const": format_rational(a.term.const),
                "rel": a.rel,
            })
        return out

    def contains(self, valuation: Mapping[str, Rational]) -> bool:
        """Membership of a point that assigns every variable of the env."""
        if self.empty:
            return False
        for name in self.env.names:
            if as_fraction(valuation[name]) < 0:
                return False
        return all(a.holds(valuation) for a in self.atoms)

    # internal raw system -------------------------------------------------------

    def _raw(self) -> Tuple[List[Row], List[Ineq]]:
        return list(self.eqs), list(self.ineqs)


def _rows_of_atoms(env: VarEnv, atoms: Iterable[Atom]) -> Tuple[List[Row], List[Ineq]]:
    eqs: List[Row] = []
    ineqs: List[Ineq] = []
    for a in atoms:
        row = _row_of(env, a.term)
        if a.rel == "=":
            eqs.append(row)
        elif a.rel == ">=":
            ineqs.append((row, False))
        elif a.rel == ">":
            ineqs.append((row, True))
        elif a.rel == "<=":
            ineqs.append((_neg(row), False))
        else:
            ineqs.append((_neg(row), True))
    return eqs, ineqs


_CANON_CACHE: Dict[tuple, Polyhedron] = {}


def _canonical(env: VarEnv, eqs: Tuple[Row, ...], ineqs: Tuple[Ineq, ...]) -> Polyhedron:
    key = (env, eqs, ineqs)
    hit = _CANON_CACHE.get(key)
    if hit is not None:
        return hit
    result = _canonicalize(env, list(eqs), list(ineqs))
    if len(_CANON_CACHE) > 200_000:
        _CANON_CACHE.clear()
    _CANON_CACHE[key] = result
    return result


def _canonicalize(env: VarEnv, eqs: List[Row], ineqs: List[Ineq]) -> Polyhedron:
    n = len(env)
    while True:
        red = _rref(eqs)
        if red is None:
            return Polyhedron.bottom(env)
        eqs = red
        cur = ineqs
        for e in eqs:
            j = _first_nz(e)
            cur = [(_substitute_eq(r, e, j), s) for r, s in cur]
        deduped = _dedupe(cur)
        if deduped is None:
            return Polyhedron.bottom(env)
        ineqs = deduped
        if not _feasible_sys(n, eqs, ineqs):
            return Polyhedron.bottom(env)

        # implicit equalities: only searched for when no interior point exists
        zero_vars = {v for v in (_single_var_zero(e) for e in eqs) if v is not None}
        relaxed = [(r, True) for r, _ in ineqs]
        pos = []
        for i, r in enumerate(_nonneg_rows(n)):
            if i not in zero_vars:
                pos.append((r, True))
        if _feasible_sys(n, eqs, [], relaxed + pos, skip_nonneg=range(n)):
            break
        found: List[Row] = []
        keep: List[Ineq] = []
        for idx, (r, s) in enumerate(ineqs):
            if not s and not _feasible_sys(n, eqs, ineqs[:idx] + ineqs[idx + 1:], [(r, True)]):
                found.append(r)
            else:
                keep.append((r, s))
        for i, r in enumerate(_nonneg_rows(n)):
            if i in zero_vars:
                continue
            if not _feasible_sys(n, eqs + found, keep, [(r, True)]):
                found.append(r)
        if not found:
            break
        eqs = eqs + found
        ineqs = keep

    # redundancy removal, deterministic order
    ordered = sorted(ineqs, key=_row_key)
    kept: List[Ineq] = []
    for idx, (r, s) in enumerate(ordered):
        others = kept + ordered[idx + 1:]
        if not _feasible_sys(n, eqs, others, [(_neg(r), not s)]):
            continue
        kept.append((r, s))
    return Polyhedron(env, tuple(eqs), tuple(sorted(kept, key=_row_key)), False)


# ---------------------------------------------------------------------------
# operations


def _check_env(a: Polyhedron, b: Polyhedron) -> None:
    if a.env != b.env:
        raise ValueError("polyhedra over different variable environments")


def conjoin(c: Polyhedron, atoms: Iterable[Atom]) -> Polyhedron:
    """Intersection of ``c`` with the given atoms, canonicalized."""
    eqs, ineqs = _rows_of_atoms(c.env, atoms)  # raises on unknown variables
    if c.empty:
        return c
    return _canonical(c.env, tuple(c.eqs) + tuple(eqs), tuple(c.ineqs) + tuple(ineqs))


def intersect(a: Polyhedron, b: Polyhedron) -> Polyhedron:
    _check_env(a, b)
    if a.empty:
        return a
    if b.empty:
        return b
    return _canonical(a.env, a.eqs + b.eqs, a.ineqs + b.ineqs)


def is_satisfiable(c: Polyhedron) -> bool:
    return not c.empty


def _eliminate_column(eqs: List[Row], ineqs: List[Ineq], j: int) -> Tuple[List[Row], List[Ineq]]:
    pick = next((e for e in eqs if e[j]), None)
    if pick is not None:
        rest = [_substitute_eq(e, pick, j) for e in eqs if e is not pick]
        return rest, [(_substitute_eq(r, pick, j), s) for r, s in ineqs]
    rows, strict = kernels.eliminate([r for r, _ in ineqs], [s for _, s in ineqs], j)
    return list(eqs), list(zip(rows, strict))


def _unit(n: int, i: int, width: Optional[int] = None) -> Row:
    width = n + 1 if width is None else width
    r = [0] * width
    r[i] = 1
    return tuple(r)


def eliminate(c: Polyhedron, names: Iterable[str]) -> Polyhedron:
    """Existential projection: the named variables become unconstrained.

    Non-negativity of each eliminated variable is made explicit before its
    column is removed, and the system is re-canonicalized (pruned) after every
    single elimination step.
    """
    cols = sorted({c.env.index(name) for name in names})
    if c.empty:
        return c
    n = len(c.env)
    cur = c
    remaining = list(cols)
    while remaining:
        eqs, ineqs = cur._raw()
        # eliminate cheaply-substitutable or low fill-in columns first
        def cost(j: int) -> Tuple[int, int]:
            if any(e[j] for e in eqs):
                return (0, 0)
            p = sum(1 for r, _ in ineqs if r[j] > 0)
            m = sum(1 for r, _ in ineqs if r[j] < 0)
            return (1, p * m - p - m)
        j = min(remaining, key=lambda k: (cost(k), k))
        remaining.remove(j)
        used = any(e[j] for e in eqs) or any(r[j] for r, _ in ineqs)
        if not used:
            continue
        ineqs = ineqs + [(_unit(n, j), False)]
        eqs, ineqs = _eliminate_column(eqs, ineqs, j)
        cur = _canonical(c.env, tuple(eqs), tuple(ineqs))
        if cur.empty:
            return cur
    return cur


def time_elapse(c: Polyhedron) -> Polyhedron:
    """All clocks advance by the same arbitrary non-negative delay."""
    if c.empty:
        return c
    env = c.env
    n = len(env)
    clocks = [i for i, k in enumerate(env.kinds) if k == CLOCK]
    if not clocks:
        return c

    # old clock value = x - d; fresh column n holds d
    def shift(row: Row) -> Row:
        d = -sum(row[i] for i in clocks)
        return tuple(row[:n]) + (d, row[n])

    eqs = [shift(e) for e in c.eqs]
    ineqs = [(shift(r), s) for r, s in c.ineqs]
    for i in clocks:
        r = [0] * (n + 2)
        r[i] = 1
        r[n] = -1
        ineqs.append((tuple(r), False))
    ineqs.append((_unit(n + 1, n), False))
    eqs, ineqs = _eliminate_column(eqs, ineqs, n)

    def drop(row: Row) -> Row:
        return tuple(row[:n]) + (row[n + 1],)

    return _canonical(env, tuple(drop(e) for e in eqs), tuple((drop(r), s) for r, s in ineqs))


def reset(c: Polyhedron, clocks: Iterable[str]) -> Polyhedron:
    clocks = sorted(set(clocks), key=c.env.index)
    for x in clocks:
        if c.env.kind(x) != CLOCK:
            raise ValueError(f"{x!r} is not a clock")
    if not clocks or c.empty:
        return c
    out = eliminate(c, clocks)
    return conjoin(out, [eq(x, 0) for x in clocks])


def project_params(c: Polyhedron) -> Polyhedron:
    return eliminate(c, c.env.clocks)


def includes(outer: Polyhedron, inner: Polyhedron) -> bool:
    """True iff every point of ``inner`` lies in ``outer``."""
    _check_env(outer, inner)
    if inner.empty:
        return True
    if outer.empty:
        return False
    n = len(inner.env)
    for e in outer.eqs:
        for r in (e, _neg(e)):
            if _feasible_sys(n, inner.eqs, inner.ineqs, [(r, True)]):
                return False
    for r, s in outer.ineqs:
        if _feasible_sys(n, inner.eqs, inner.ineqs, [(_neg(r), not s)]):
            return False
    return True


def equivalent(a: Polyhedron, b: Polyhedron) -> bool:
    return includes(a, b) and includes(b, a)


def instantiate(c: Polyhedron, valuation: Mapping[str, Rational], partial: bool = False) -> Polyhedron:
    """Substitute parameter values; the result lives over the other variables.

    Unless ``partial`` is set, every parameter occurring in ``c`` needs a value.
    """
    values = {k: as_fraction(v) for k, v in valuation.items() if k in c.env}
    for name in values:
        if c.env.kind(name) != PARAMETER:
            raise ValueError(f"{name!r} is not a parameter")
    used = set(c.variables())
    missing = [p for p in c.env.parameters if p in used and p not in values]
    if missing and not partial:
        raise MissingParameterError(f"no value for parameter(s): {', '.join(missing)}")
    new_env = c.env.restrict(n for n in c.env.names if n not in values)
    if c.empty:
        return Polyhedron.bottom(new_env)
    atoms = [Atom(a.term.substitute(values), a.rel) for a in c.atoms]
    for name, v in values.items():
        if v < 0:
            return Polyhedron.bottom(new_env)
    return Polyhedron.from_atoms(new_env, atoms)


def change_env(c: Polyhedron, env: VarEnv) -> Polyhedron:
    """Re-express ``c`` over another environment containing its used variables."""
    used = c.variables()
    for name in used:
        env.index(name)
    if c.empty:
        return Polyhedron.bottom(env)
    return Polyhedron.from_atoms(env, c.atoms)


def subtract(p: Polyhedron, q: Polyhedron) -> List[Polyhedron]:
    """``p \\ q`` as a list of pairwise-disjoint convex pieces."""
    _check_env(p, q)
    if p.empty:
        return []
    if q.empty:
        return [p]
    pieces: List[Polyhedron] = []
    cur = p
    for a in q.atoms:
        negs = [Atom(a.term, ">"), Atom(a.term, "<")] if a.rel == "=" else [a.negate()]
        for na in negs:
            piece = conjoin(cur, [na])
            if not piece.empty:
                pieces.append(piece)
        cur = conjoin(cur, [a])
        if cur.empty:
            break
    return pieces


# ---------------------------------------------------------------------------
# finite unions


@dataclass(frozen=True)
class ConstraintSet:
    env: VarEnv
    disjuncts: Tuple[Polyhedron, ...] = ()

    @classmethod
    def false(cls, env: VarEnv) -> "ConstraintSet":
        return cls(env, ())

    @classmethod
    def true(cls, env: VarEnv) -> "ConstraintSet":
        return cls(env, (Polyhedron.universe(env),))

    @classmethod
    def of(cls, env: VarEnv, polys: Iterable[Polyhedron]) -> "ConstraintSet":
        out = cls(env, ())
        for p in polys:
            out = out.add(p)
        return out

    def add(self, p: Polyhedron) -> "ConstraintSet":
        """Union with one polyhedron, pruning pairwise-included disjuncts."""
        if p.env != self.env:
            raise ValueError("polyhedron over a different environment")
        if p.empty:
            return self
        if any(includes(d, p) for d in self.disjuncts):
            return self
        kept = [d for d in self.disjuncts if not includes(p, d)]
        kept.append(p)
        return ConstraintSet(self.env, tuple(sorted(kept, key=_poly_key)))

    def is_empty(self) -> bool:
        return not self.disjuncts

    def union(self, other: "ConstraintSet") -> "ConstraintSet":
        out = self
        for d in other.disjuncts:
            out = out.add(d)
        return out

    def intersection(self, other: "ConstraintSet") -> "ConstraintSet":
        if other.env != self.env:
            raise ValueError("constraint sets over different environments")
        out = ConstraintSet(self.env)
        for a in self.disjuncts:
            for b in other.disjuncts:
                out = out.add(intersect(a, b))
        return out

    def eliminate(self, names: Iterable[str]) -> "ConstraintSet":
        names = list(names)
        return ConstraintSet.of(self.env, (eliminate(d, names) for d in self.disjuncts))

    def instantiate(self, valuation: Mapping[str, Rational], partial: bool = False) -> "ConstraintSet":
        parts = [instantiate(d, valuation, partial) for d in self.disjuncts]
        env = self.env.restrict(n for n in self.env.names if n not in valuation)
        return ConstraintSet.of(env, parts)

    def change_env(self, env: VarEnv) -> "ConstraintSet":
        return ConstraintSet.of(env, (change_env(d, env) for d in self.disjuncts))

    def contains(self, valuation: Mapping[str, Rational]) -> bool:
        return any(d.contains(valuation) for d in self.disjuncts)

    def covers(self, p: Polyhedron) -> bool:
        """Exact test ``p`` is a subset of the union."""
        pieces = [p] if not p.empty else []
        for d in self.disjuncts:
            nxt = []
            for piece in pieces:
                nxt.extend(subtract(piece, d))
            pieces = nxt
            if not pieces:
                return True
        return not pieces

    def includes(self, other: "ConstraintSet") -> bool:
        return all(self.covers(d) for d in other.disjuncts)

    def merged(self, limit: int = 64) -> "ConstraintSet":
        """Same set with disjuncts replaced by their exact joins where possible.

        The envelope of some disjuncts (their atoms entailed by every one of
        them) contains their union; when the union also covers the envelope,
        the envelope replaces them.
        """
        ds = list(self.disjuncts)
        if len(ds) < 2 or len(ds) > limit:
            return self
        whole = _envelope(self.env, ds)
        if self.covers(whole):
            return ConstraintSet(self.env, (whole,))
        changed = True
        while changed:
            changed = False
            for i in range(len(ds)):
                for j in range(i + 1, len(ds)):
                    hull = _envelope(self.env, [ds[i], ds[j]])
                    if ConstraintSet.of(self.env, [ds[i], ds[j]]).covers(hull):
                        ds = [d for k, d in enumerate(ds) if k not in (i, j)] + [hull]
                        changed = True
                        break
                if changed:
                    break
        return ConstraintSet.of(self.env, ds)

    def equivalent(self, other: "ConstraintSet") -> bool:
        return self.includes(other) and other.includes(self)

    def variables(self) -> Tuple[str, ...]:
        used = set()
        for d in self.disjuncts:
            used.update(d.variables())
        return tuple(n for n in self.env.names if n in used)

    def __str__(self) -> str:
        if not self.disjuncts:
            return "false"
        return " OR ".join(str(d) for d in self.disjuncts)

    def to_json(self) -> list:
        return [d.to_json() for d in self.disjuncts]


def _envelope(env: VarEnv, polys: List[Polyhedron]) -> Polyhedron:
    seen: List[Atom] = []
    for p in polys:
        for a in p.atoms:
            if a not in seen:
                seen.append(a)
    kept = []
    for a in seen:
        single = Polyhedron.from_atoms(env, [a])
        if all(includes(single, q) for q in polys):
            kept.append(a)
    return Polyhedron.from_atoms(env, kept)


def _poly_key(p: Polyhedron):
    return (tuple(_row_key_eq(e) for e in p.eqs), tuple(_row_key(i) for i in p.ineqs))


def set_is_empty(s: ConstraintSet) -> bool:
    return s.is_empty()


def set_union(a: ConstraintSet, b: ConstraintSet) -> ConstraintSet:
    return a.union(b)


def set_intersection(a: ConstraintSet, b: ConstraintSet) -> ConstraintSet:
    return a.intersection(b)


def clear_caches() -> None:
    _CANON_CACHE.clear()
    _feasible.cache_clear()
