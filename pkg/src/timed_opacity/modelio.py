"""Textual ``.pta`` model format: tokenizer, recursive-descent parser with
positioned diagnostics, and a deterministic serializer.

Example::

    pta fig1
    clock x;
    param p1, p2;

    automaton A {
      init loc l0 : invariant x <= 3 {
        when x >= p2 goto l1;
        when x >= p1 goto l2;
      }
      final loc l1 { }
      private loc l2 : invariant x <= 3 {
        when true goto l1;
      }
    }
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from .constraints import Atom, LinearTerm
from .errors import ModelError, OpacityError, ParseError
from .pta import INPUT, PTA, SHARED, ClockAtom, Edge, Guard, Parameter, product, split_atom

KEYWORDS = frozenset(
    "pta clock param bool sync automaton init private final loc invariant when do goto true false shared input".split()
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<string>"[^"\n]*")
  | (?P<op>:=|&&|<=|>=|==|[<>=;:,{}()*/^+\-!])
    """,
    re.VERBOSE,
)

_RELS = {"<": "<", "<=": "<=", "=": "=", "==": "=", ">=": ">=", ">": ">"}


@dataclass(frozen=True)
class Token:
    kind: str  # number | ident | string | op | eof
    text: str
    line: int
    column: int


def tokenize(text: str, source: Optional[str] = None) -> List[Token]:
    tokens: List[Token] = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1, source)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


@dataclass
class Model:
    """A parsed model file."""

    pta: PTA
    final: Optional[str] = None
    components: Tuple[PTA, ...] = ()
    sync: Tuple[str, ...] = ()
    notes: List[str] = field(default_factory=list)


class _Parser:
    def __init__(self, text: str, source: Optional[str]):
        self.source = source
        self.tokens = tokenize(text, source)
        self.i = 0
        self.clocks: List[str] = []
        self.params: List[Parameter] = []
        self.bools: List[Tuple[str, bool]] = []
        self.sync: List[str] = []
        self.symbols: Dict[str, str] = {}
        self.notes: List[str] = []

    # token helpers ------------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        t = tok or self.tok
        return ParseError(message, t.line, t.column, self.source)

    def advance(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "ident") and t.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def name(self, what: str, allow_string: bool = False) -> Tuple[str, Token]:
        t = self.tok
        if t.kind == "ident" and t.text not in KEYWORDS:
            self.advance()
            return t.text, t
        if allow_string and t.kind == "string":
            self.advance()
            inner = t.text[1:-1]
            if not inner:
                raise self.error("empty name", t)
            return inner, t
        found = t.text or "end of input"
        raise self.error(f"expected {what}, found {found!r}", t)

    def declare(self, name: str, kind: str, tok: Token) -> None:
        if name in self.symbols:
            raise self.error(f"duplicate declaration of {name!r} (already a {self.symbols[name]})", tok)
        self.symbols[name] = kind

    # grammar -----------------------------------------------------------------

    def parse(self) -> Model:
        self.expect("pta")
        model_name, _ = self.name("model name", allow_string=True)
        while self.tok.text in ("clock", "param", "bool", "sync") and self.tok.kind == "ident":
            self.declaration()
        components: List[PTA] = []
        usage = []
        finals: List[Tuple[str, Token]] = []
        seen_automata = set()
        while self.at("automaton"):
            comp, comp_finals, used = self.automaton(seen_automata)
            components.append(comp)
            usage.append(used)
            finals.extend(comp_finals)
        if not components:
            raise self.error("expected 'automaton'")
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r} after last automaton")
        if len(finals) > 1:
            raise self.error("several locations are marked final", finals[1][1])
        if len(components) > 1:
            components = _distribute(components, usage)
        try:
            if len(components) == 1 and not self.sync:
                pta = PTA(model_name, *_fields(components[0]))
            else:
                pta = product(components, self.sync, name=model_name)
            pta.validate()
        except ModelError as exc:
            raise ParseError(str(exc), 1, 1, self.source) from None
        final = None
        if finals:
            final = finals[0][0]
            if len(components) > 1:
                final = None  # a component location does not name a product location
        return Model(pta, final, tuple(components), tuple(self.sync), self.notes)

    def declaration(self) -> None:
        kw = self.advance().text
        if kw == "clock":
            while True:
                n, t = self.name("clock name")
                self.declare(n, "clock", t)
                self.clocks.append(n)
                if not self.accept(","):
                    break
        elif kw == "param":
            while True:
                n, t = self.name("parameter name")
                role = SHARED
                if self.accept(":"):
                    r = self.tok
                    if r.text not in (SHARED, INPUT):
                        raise self.error("expected parameter role 'shared' or 'input'")
                    self.advance()
                    role = r.text
                self.declare(n, "parameter", t)
                self.params.append(Parameter(n, role))
                if not self.accept(","):
                    break
        elif kw == "bool":
            n, t = self.name("boolean name")
            self.expect("=")
            v = self.boolean()
            self.declare(n, "boolean", t)
            self.bools.append((n, v))
        else:  # sync
            while True:
                n, t = self.name("action name")
                if n in self.sync:
                    raise self.error(f"duplicate sync action {n!r}", t)
                self.sync.append(n)
                if not self.accept(","):
                    break
        self.expect(";")

    def boolean(self) -> bool:
        if self.accept("true"):
            return True
        if self.accept("false"):
            return False
        raise self.error("expected 'true' or 'false'")

    def automaton(self, seen: set):
        self.expect("automaton")
        aname, at = self.name("automaton name", allow_string=True)
        if aname in seen:
            raise self.error(f"duplicate automaton {aname!r}", at)
        seen.add(aname)
        self.expect("{")
        locations: List[str] = []
        loc_tokens: Dict[str, Token] = {}
        invariants: Dict[str, Guard] = {}
        private = set()
        finals: List[Tuple[str, Token]] = []
        initial: Optional[str] = None
        edges: List[Tuple[Edge, Token]] = []
        while not self.at("}"):
            is_init = is_priv = is_final = False
            while self.tok.text in ("init", "private", "final") and self.tok.kind == "ident":
                flag = self.advance()
                if flag.text == "init":
                    is_init = True
                elif flag.text == "private":
                    is_priv = True
                else:
                    is_final = True
            self.expect("loc")
            ln, lt = self.name("location name", allow_string=True)
            if ln in loc_tokens:
                raise self.error(f"duplicate location {ln!r}", lt)
            loc_tokens[ln] = lt
            locations.append(ln)
            if is_init:
                if initial is not None:
                    raise self.error(f"second initial location {ln!r}", lt)
                initial = ln
            if is_priv:
                private.add(ln)
            if is_final:
                finals.append((ln, lt))
            if self.accept(":"):
                self.expect("invariant")
                gt = self.tok
                g = self.guard()
                if g.param_atoms or g.bool_tests:
                    raise self.error("invariants may only bound clocks", gt)
                invariants[ln] = g
            self.expect("{")
            while not self.at("}"):
                edges.append(self.edge(ln))
            self.expect("}")
        close = self.expect("}")
        if initial is None:
            raise self.error(f"automaton {aname!r} has no initial location", close)
        for e, tgt_tok in edges:
            if e.target not in loc_tokens:
                raise self.error(f"unknown location {e.target!r}", tgt_tok)
        used_clocks, used_bools = set(), set()
        for g in list(invariants.values()) + [e.guard for e, _ in edges]:
            used_clocks.update(c.clock for c in g.clock_atoms)
            used_bools.update(v for v, _ in g.bool_tests)
        for e, _ in edges:
            used_clocks.update(e.resets)
            used_bools.update(v for v, _ in e.bool_updates)
        comp = PTA(
            name=aname,
            locations=tuple(locations),
            initial=initial,
            clocks=tuple(self.clocks),
            parameters=tuple(self.params),
            invariants=invariants,
            edges=tuple(e for e, _ in edges),
            discrete_vars=tuple(self.bools),
            private_locations=frozenset(private),
        )
        return comp, finals, (used_clocks, used_bools)

    def edge(self, source: str) -> Tuple[Edge, Token]:
        private = self.accept("private")
        self.expect("when")
        guard = self.guard()
        action = None
        if self.accept("sync"):
            action, _ = self.name("action name")
        resets: List[str] = []
        updates: List[Tuple[str, bool]] = []
        if self.accept("do"):
            while True:
                n, t = self.name("clock or boolean")
                self.expect(":=")
                kind = self.symbols.get(n)
                if kind == "clock":
                    z = self.tok
                    if not (z.kind == "number" and Fraction(z.text) == 0):
                        raise self.error("clocks can only be reset to 0", z)
                    self.advance()
                    if n not in resets:
                        resets.append(n)
                elif kind == "boolean":
                    updates.append((n, self.boolean()))
                else:
                    raise self.error(f"{n!r} is not a declared clock or boolean", t)
                if not self.accept(","):
                    break
        self.expect("goto")
        target, tt = self.name("target location", allow_string=True)
        self.expect(";")
        return Edge(source, target, guard, action, tuple(resets), tuple(updates), private), tt

    def guard(self) -> Guard:
        if self.accept("true"):
            return Guard.TRUE
        clock_atoms: List[ClockAtom] = []
        param_atoms: List[Atom] = []
        tests: List[Tuple[str, bool]] = []
        while True:
            start = self.tok
            if self.accept("!"):
                n, t = self.name("boolean")
                if self.symbols.get(n) != "boolean":
                    raise self.error(f"{n!r} is not a declared boolean", t)
                tests.append((n, False))
            elif start.kind == "ident" and self.symbols.get(start.text) == "boolean":
                self.advance()
                tests.append((start.text, True))
            else:
                lhs = self.linexpr()
                rel_tok = self.tok
                if rel_tok.text not in _RELS or rel_tok.kind != "op":
                    raise self.error("expected a comparison operator")
                self.advance()
                rhs = self.linexpr()
                atom = Atom(lhs - rhs, _RELS[rel_tok.text])
                try:
                    part = split_atom(atom, self.clocks)
                except ModelError:
                    raise self.error("a guard may compare only one clock with parameters and constants", start) from None
                if isinstance(part, ClockAtom):
                    clock_atoms.append(part)
                else:
                    param_atoms.append(part)
                    self.notes.append(
                        f"{start.line}:{start.column}: parameter-only comparison '{atom}' extends the clock-versus-parameter guard shape"
                    )
            if not self.accept("&&"):
                break
        return Guard(tuple(clock_atoms), tuple(param_atoms), tuple(tests))

    # linear expressions ------------------------------------------------------

    def linexpr(self) -> LinearTerm:
        neg = False
        if self.accept("-"):
            neg = True
        elif self.accept("+"):
            pass
        acc = self.product_term()
        if neg:
            acc = -acc
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.advance().text
            t = self.product_term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def product_term(self) -> LinearTerm:
        acc = self.factor()
        while self.tok.kind == "op" and self.tok.text in ("*", "/"):
            op = self.advance()
            rhs = self.factor()
            if op.text == "/":
                if rhs.coeffs:
                    raise self.error("division by a variable is not linear", op)
                if rhs.const == 0:
                    raise self.error("division by zero", op)
                acc = acc * (1 / rhs.const)
            elif acc.coeffs and rhs.coeffs:
                raise self.error("product of two variables is not linear", op)
            elif acc.coeffs:
                acc = acc * rhs.const
            else:
                acc = rhs * acc.const
        return acc

    def factor(self) -> LinearTerm:
        t = self.tok
        if self.accept("-"):
            return -self.factor()
        if self.accept("("):
            e = self.linexpr()
            self.expect(")")
            return e
        if t.kind == "number":
            self.advance()
            value = Fraction(t.text)
            if self.accept("^"):
                ex = self.tok
                if ex.kind != "number" or "." in ex.text:
                    raise self.error("exponent must be a non-negative integer", ex)
                self.advance()
                if int(ex.text) > 64:
                    raise self.error("exponent too large", ex)
                value = value ** int(ex.text)
            return LinearTerm.constant(value)
        if t.kind == "ident" and t.text not in KEYWORDS:
            kind = self.symbols.get(t.text)
            if kind is None:
                raise self.error(f"undeclared identifier {t.text!r}")
            if kind == "boolean":
                raise self.error(f"boolean {t.text!r} cannot appear in a linear expression")
            self.advance()
            return LinearTerm.var(t.text)
        found = t.text or "end of input"
        raise self.error(f"expected a number or identifier, found {found!r}")


def _distribute(components: List[PTA], usage) -> List[PTA]:
    """Give each global clock and boolean to the first component using it."""
    owner: Dict[str, int] = {}
    for i, (clocks, bools) in enumerate(usage):
        for n in list(clocks) + list(bools):
            owner.setdefault(n, i)
    out = []
    for i, c in enumerate(components):
        out.append(
            replace(
                c,
                clocks=tuple(x for x in c.clocks if owner.get(x, 0) == i),
                discrete_vars=tuple(v for v in c.discrete_vars if owner.get(v[0], 0) == i),
            )
        )
    return out


def _fields(comp: PTA):
    return (
        comp.locations,
        comp.initial,
        comp.clocks,
        comp.parameters,
        comp.invariants,
        comp.edges,
        comp.discrete_vars,
        comp.private_locations,
    )


def parse(text: Union[str, bytes], source: Optional[str] = None) -> Model:
    """Parse model text; every failure is a :class:`ParseError`."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8: {exc.reason}", 1, 1, source) from None
    parser = _Parser(text, source)
    try:
        return parser.parse()
    except ParseError:
        raise
    except (OpacityError, ValueError, ZeroDivisionError, OverflowError) as exc:
        raise parser.error(str(exc)) from None


def load(path: Union[str, Path]) -> Model:
    p = Path(path)
    return parse(p.read_bytes(), source=str(p))


# ---------------------------------------------------------------------------
# serializer

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")


def format_number(q: Fraction) -> str:
    """Decimal when the expansion terminates, ``num/den`` otherwise."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    d = q.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{q.numerator}/{q.denominator}"
    digits = max(twos, fives)
    scaled = abs(q) * 10**digits
    s = str(scaled.numerator).rjust(digits + 1, "0")
    sign = "-" if q < 0 else ""
    return f"{sign}{s[:-digits]}.{s[-digits:]}"


def _name(n: str) -> str:
    return n if _IDENT_RE.match(n) and n not in KEYWORDS else f'"{n}"'


def _sum(items: List[Tuple[str, Fraction]], const: Fraction) -> str:
    """Render ``sum + const`` with non-negative entries (callers split signs)."""
    parts = [n if k == 1 else f"{format_number(k)}*{n}" for n, k in items]
    if const or not parts:
        parts.append(format_number(const))
    return " + ".join(parts)


def _term(t: LinearTerm) -> str:
    out = ""
    for n, k in t.coeffs:
        piece = n if abs(k) == 1 else f"{format_number(abs(k))}*{n}"
        if not out:
            out = piece if k > 0 else f"-{piece}"
        else:
            out += (" + " if k > 0 else " - ") + piece
    if t.const or not out:
        c = t.const
        if not out:
            out = format_number(c)
        else:
            out += (" + " if c > 0 else " - ") + format_number(abs(c))
    return out


def _param_atom(a: Atom) -> str:
    # lhs - rhs must reproduce the stored term exactly, so no rescaling
    left = [(n, k) for n, k in a.term.coeffs if k > 0]
    right = [(n, -k) for n, k in a.term.coeffs if k < 0]
    c = a.term.const
    return f"{_sum(left, c if c > 0 else Fraction(0))} {a.rel} {_sum(right, -c if c < 0 else Fraction(0))}"


def format_guard(g: Guard) -> str:
    parts = [f"{c.clock} {c.rel} {_term(c.bound)}" for c in g.clock_atoms]
    parts += [_param_atom(a) for a in g.param_atoms]
    parts += [v if b else f"!{v}" for v, b in g.bool_tests]
    return " && ".join(parts) if parts else "true"


def serialize(a: PTA, final: Optional[str] = None) -> str:
    lines = [f"pta {_name(a.name)}"]
    if a.clocks:
        lines.append(f"clock {', '.join(a.clocks)};")
    if a.parameters:
        ps = [p.name if p.role == SHARED else f"{p.name}: {p.role}" for p in a.parameters]
        lines.append(f"param {', '.join(ps)};")
    for v, b in a.discrete_vars:
        lines.append(f"bool {v} = {'true' if b else 'false'};")
    lines.append("")
    lines.append(f"automaton {_name(a.name)} {{")
    for loc in a.locations:
        flags = []
        if loc == a.initial:
            flags.append("init")
        if loc in a.private_locations:
            flags.append("private")
        if loc == final:
            flags.append("final")
        head = " ".join(flags + ["loc", _name(loc)])
        inv = a.invariants.get(loc)
        if inv is not None:
            head += f" : invariant {format_guard(inv)}"
        out = a.outgoing(loc)
        if not out:
            lines.append(f"  {head} {{ }}")
            continue
        lines.append(f"  {head} {{")
        for e in out:
            s = "    "
            if e.private:
                s += "private "
            s += f"when {format_guard(e.guard)}"
            if e.action is not None:
                s += f" sync {e.action}"
            ups = [f"{x} := 0" for x in e.resets] + [f"{v} := {'true' if b else 'false'}" for v, b in e.bool_updates]
            if ups:
                s += f" do {', '.join(ups)}"
            s += f" goto {_name(e.target)};"
            lines.append(s)
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"
