"""Select the Fourier-Motzkin kernel at import time.

The compiled module ``_fm`` works on 64-bit machine integers and raises
``OverflowError`` when a coefficient leaves that range; in that case the call
is retried on the arbitrary-precision pure-Python kernel.  Setting the
environment variable ``TIMED_OPACITY_PURE_PYTHON=1`` skips the compiled
kernel entirely.

Feasibility first runs elimination pruned by Chernikov's rule, which keeps
the number of rows polynomial per step.  A derived contradiction settles the
question; otherwise a witness point is back-substituted and checked against
the input rows, and only if that check fails does the unpruned elimination
run.
"""

from __future__ import annotations

import os
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from . import _fm_py

Row = Tuple[int, ...]

_compiled = None
if os.environ.get("TIMED_OPACITY_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _fm as _compiled  # type: ignore[attr-defined,no-redef]
    except ImportError:  # pragma: no cover - depends on the build
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
normalize = _fm_py.normalize


def _exact_feasible(rows: Sequence[Row], strict: Sequence[bool], nvars: int) -> bool:
    if _compiled is not None:
        try:
            return _compiled.is_feasible(rows, strict, nvars)
        except OverflowError:
            pass
    return _fm_py.is_feasible(rows, strict, nvars)


def _eliminate_all(rows: Sequence[Row], strict: Sequence[bool], nvars: int):
    if _compiled is not None:
        try:
            return _compiled.eliminate_all(rows, strict, nvars)
        except OverflowError:
            pass
    return _fm_py.eliminate_all(rows, strict, nvars)


def witness(stages, nvars: int) -> Optional[List[Fraction]]:
    """Back-substitute a point through the stages of ``eliminate_all``."""
    point = [Fraction(0)] * nvars
    for j, used in reversed(stages):
        lo = hi = None
        lo_strict = hi_strict = False
        for row, s in used:
            rest = row[-1] + sum(a * point[i] for i, a in enumerate(row[:-1]) if a and i != j)
            a = row[j]
            bound = Fraction(-rest, a)
            if a > 0:
                if lo is None or bound > lo or (bound == lo and s):
                    lo, lo_strict = bound, s
            elif hi is None or bound < hi or (bound == hi and s):
                hi, hi_strict = bound, s
        if lo is not None and hi is not None:
            if lo < hi:
                point[j] = (lo + hi) / 2
            elif lo == hi and not (lo_strict or hi_strict):
                point[j] = lo
            else:
                return None
        elif lo is not None:
            point[j] = lo + 1 if lo_strict else lo
        elif hi is not None:
            point[j] = hi - 1 if hi_strict else hi
    return point


def satisfies(rows: Sequence[Row], strict: Sequence[bool], point: Sequence[Fraction]) -> bool:
    for row, s in zip(rows, strict):
        v = row[-1] + sum(a * x for a, x in zip(row, point) if a)
        if v < 0 or (v == 0 and s):
            return False
    return True


def is_feasible(rows: Sequence[Row], strict: Sequence[bool], nvars: int) -> bool:
    rows = [tuple(r) for r in rows]
    strict = list(strict)
    ok, stages = _eliminate_all(rows, strict, nvars)
    if not ok:
        return False
    point = witness(stages, nvars)
    if point is not None and satisfies(rows, strict, point):
        return True
    return _exact_feasible(rows, strict, nvars)


def eliminate(rows: Sequence[Row], strict: Sequence[bool], j: int) -> Tuple[List[Row], List[bool]]:
    if _compiled is not None:
        try:
            return _compiled.eliminate(rows, strict, j)
        except OverflowError:
            pass
    return _fm_py.eliminate(rows, strict, j)
