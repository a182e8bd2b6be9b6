"""Pure-Python Fourier-Motzkin kernel over integer rows.

A row is a tuple ``(a_1, ..., a_n, c)`` of Python ints standing for
``a_1*v_1 + ... + a_n*v_n + c >= 0`` (or ``> 0`` when its strict flag is set).
The compiled twin in ``_fm.pyx`` exposes the same three functions and must
give identical answers.
"""

from __future__ import annotations

from math import gcd
from typing import Dict, List, Sequence, Tuple

Row = Tuple[int, ...]


def normalize(row: Sequence[int]) -> Row:
    g = 0
    for v in row:
        if v:
            g = gcd(g, v)
            if g == 1:
                return tuple(row)
    if g <= 1:
        return tuple(row)
    return tuple(v // g for v in row)


def _combine(p: Row, n: Row, j: int) -> Row:
    # p[j] > 0, n[j] < 0
    a = -n[j]
    b = p[j]
    return normalize([a * x + b * y for x, y in zip(p, n)])


def _insert(table: Dict[Row, Tuple[int, bool]], row: Row, strict: bool) -> None:
    key = row[:-1]
    c = row[-1]
    old = table.get(key)
    if old is None or c < old[0] or (c == old[0] and strict and not old[1]):
        table[key] = (c, strict)


def eliminate(rows: Sequence[Row], strict: Sequence[bool], j: int) -> Tuple[List[Row], List[bool]]:
    """One elimination step on column ``j``.

    Rows are combined pairwise (positive with negative coefficient), rows with
    identical coefficient vectors are pruned down to the tightest one.  Constant
    rows are kept verbatim so the caller can detect contradictions.
    """
    src: Dict[Row, Tuple[int, bool]] = {}
    for row, s in zip(rows, strict):
        _insert(src, tuple(row), s)
    pos = []
    neg = []
    table: Dict[Row, Tuple[int, bool]] = {}
    for key, (c, s) in src.items():
        row = key + (c,)
        a = row[j]
        if a > 0:
            pos.append((row, s))
        elif a < 0:
            neg.append((row, s))
        else:
            _insert(table, row, s)
    for p, sp in pos:
        for n, sn in neg:
            _insert(table, _combine(p, n, j), sp or sn)
    out_rows = []
    out_strict = []
    for key, (c, s) in table.items():
        out_rows.append(key + (c,))
        out_strict.append(s)
    return out_rows, out_strict


def is_feasible(rows: Sequence[Row], strict: Sequence[bool], nvars: int) -> bool:
    """Decide whether the conjunction of rows has a rational solution.

    Variables are unrestricted here; callers add ``v >= 0`` rows themselves.
    """
    table: Dict[Row, Tuple[int, bool]] = {}
    for row, s in zip(rows, strict):
        _insert(table, normalize(row), s)
    live = set(range(nvars))
    while True:
        cur_rows = []
        cur_strict = []
        for key, (c, s) in table.items():
            if not any(key):
                if c < 0 or (c == 0 and s):
                    return False
                continue
            cur_rows.append(key + (c,))
            cur_strict.append(s)
        if not cur_rows:
            return True
        best = -1
        best_cost = None
        for j in sorted(live):
            np_ = nn = 0
            for r in cur_rows:
                if r[j] > 0:
                    np_ += 1
                elif r[j] < 0:
                    nn += 1
            if np_ == 0 and nn == 0:
                continue
            cost = np_ * nn - np_ - nn
            if best_cost is None or cost < best_cost:
                best, best_cost = j, cost
        live.discard(best)
        new_rows, new_strict = eliminate(cur_rows, cur_strict, best)
        table = {}
        for row, s in zip(new_rows, new_strict):
            _insert(table, row, s)


def _pick(counts: Dict[int, Tuple[int, int]]) -> int:
    best, best_cost = -1, None
    for j in sorted(counts):
        np_, nn = counts[j]
        cost = np_ * nn - np_ - nn
        if best_cost is None or cost < best_cost:
            best, best_cost = j, cost
    return best


def _insert_h(table: Dict[Row, Tuple[int, bool, int]], row: Row, strict: bool, hist: int) -> None:
    key = row[:-1]
    c = row[-1]
    old = table.get(key)
    if (
        old is None
        or c < old[0]
        or (c == old[0] and strict and not old[1])
        or (c == old[0] and strict == old[1] and hist.bit_count() < old[2].bit_count())
    ):
        table[key] = (c, strict, hist)


def eliminate_all(rows: Sequence[Row], strict: Sequence[bool], nvars: int):
    """Eliminate every variable, pruning with Chernikov's rule.

    Each derived row carries the set of input rows it combines (a bit mask);
    after ``s`` steps rows combining more than ``s + 1`` inputs are dropped
    before they can displace anything.
    Returns ``(False, [])`` when a contradiction is derived, which is always
    sound.  Otherwise returns ``(True, stages)`` where ``stages`` lists, per
    step, the eliminated column and the rows (with strict flags) in which it
    still occurred; the caller back-substitutes a witness from them.
    """
    table: Dict[Row, Tuple[int, bool, int]] = {}
    for i, (row, s) in enumerate(zip(rows, strict)):
        _insert_h(table, normalize(row), s, 1 << i)
    stages = []
    step = 0
    while True:
        cur = []
        counts: Dict[int, Tuple[int, int]] = {}
        for key, (c, s, h) in table.items():
            if not any(key):
                if c < 0 or (c == 0 and s):
                    return False, []
                continue
            if h.bit_count() > step + 1:
                continue
            cur.append((key + (c,), s, h))
            for j, a in enumerate(key):
                if a:
                    np_, nn = counts.get(j, (0, 0))
                    counts[j] = (np_ + 1, nn) if a > 0 else (np_, nn + 1)
        if not cur:
            return True, stages
        j = _pick(counts)
        step += 1
        table = {}
        pos, neg, used = [], [], []
        for row, s, h in cur:
            if row[j] > 0:
                pos.append((row, s, h))
            elif row[j] < 0:
                neg.append((row, s, h))
            else:
                _insert_h(table, row, s, h)
                continue
            used.append((row, s))
        stages.append((j, used))
        for p, sp, hp in pos:
            for n, sn, hn in neg:
                h = hp | hn
                if h.bit_count() <= step + 1:
                    _insert_h(table, _combine(p, n, j), sp or sn, h)
