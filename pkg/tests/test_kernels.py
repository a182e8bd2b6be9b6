from __future__ import annotations

import os
import subprocess
import sys

import random
from fractions import Fraction
from time import perf_counter

import pytest
from hypothesis import given, settings, strategies as st

from timed_opacity import _fm_py, kernels

compiled = pytest.importorskip("timed_opacity._fm", reason="compiled kernel not built")

NV = 4
row = st.tuples(*([st.integers(-5, 5)] * (NV + 1)))
system = st.lists(st.tuples(row, st.booleans()), min_size=0, max_size=8)


@settings(max_examples=300, deadline=None)
@given(system)
def test_feasibility_agrees(sys_):
    rows = [r for r, _ in sys_]
    strict = [s for _, s in sys_]
    assert compiled.is_feasible(rows, strict, NV) == _fm_py.is_feasible(rows, strict, NV)


@settings(max_examples=300, deadline=None)
@given(system, st.integers(0, NV - 1))
def test_elimination_agrees(sys_, j):
    rows = [r for r, _ in sys_]
    strict = [s for _, s in sys_]
    a = dict(zip(*compiled.eliminate(rows, strict, j)))
    b = dict(zip(*_fm_py.eliminate(rows, strict, j)))
    assert a == b


def test_strictness_propagates():
    # x - 1 > 0 and -x + 1 >= 0 combine into 0 > 0
    assert not _fm_py.is_feasible([(1, -1), (-1, 1)], [True, False], 1)
    assert not compiled.is_feasible([(1, -1), (-1, 1)], [True, False], 1)
    assert compiled.is_feasible([(1, -1), (-1, 1)], [False, False], 1)


def test_overflow_falls_back_to_python():
    big = 2**62
    rows = [(big, 3, -1), (-big, 5, 0), (0, -1, big)]
    with pytest.raises(OverflowError):
        compiled.eliminate(rows, [False] * 3, 0)
    # the wrapper transparently retries on arbitrary-precision integers
    assert kernels.eliminate(rows, [False] * 3, 0) == _fm_py.eliminate(rows, [False] * 3, 0)
    huge = [(2**70, -1)]
    assert kernels.is_feasible(huge, [False], 1) is True


def test_backend_selection_by_environment():
    env = dict(os.environ, TIMED_OPACITY_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import timed_opacity.kernels as k; print(k.BACKEND)"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == "python"
    if not os.environ.get("TIMED_OPACITY_PURE_PYTHON"):
        assert kernels.BACKEND == "compiled"


def _sys(sys_):
    return [r for r, _ in sys_], [s for _, s in sys_]


@settings(max_examples=300, deadline=None)
@given(system)
def test_pruned_elimination_agrees(sys_):
    rows, strict = _sys(sys_)
    assert compiled.eliminate_all(rows, strict, NV) == _fm_py.eliminate_all(rows, strict, NV)


@settings(max_examples=500, deadline=None)
@given(st.lists(st.tuples(st.tuples(*([st.integers(-5, 5)] * 5)), st.booleans()), max_size=9))
def test_certified_path_matches_exact(sys_):
    # the pruned elimination plus witness check against the unpruned procedure
    rows, strict = _sys(sys_)
    exact = _fm_py.is_feasible(rows, strict, 4)
    assert kernels.is_feasible(rows, strict, 4) == exact
    ok, stages = _fm_py.eliminate_all(rows, strict, 4)
    if not ok:
        assert not exact
    else:
        w = kernels.witness(stages, 4)
        if w is not None and kernels.satisfies(rows, strict, w):
            assert exact


def test_witness_is_exact_point():
    # 0 < x < 1, y = 2x, y >= 1: only x in [1/2, 1)
    rows = [(1, 0, 0), (-1, 0, 1), (2, -1, 0), (-2, 1, 0), (0, 1, -1)]
    strict = [True, True, False, False, False]
    ok, stages = _fm_py.eliminate_all(rows, strict, 2)
    assert ok
    w = kernels.witness(stages, 2)
    assert kernels.satisfies(rows, strict, w)
    assert Fraction(1, 2) <= w[0] < 1 and w[1] == 2 * w[0]
    assert not kernels.satisfies(rows, strict, [Fraction(1), Fraction(2)])


def test_feasibility_scales():
    rng = random.Random(0)
    t0 = perf_counter()
    for _ in range(20):
        rows = [tuple(rng.randint(-4, 4) for _ in range(6)) for _ in range(14)]
        kernels.is_feasible(rows, [rng.random() < 0.3 for _ in rows], 5)
    assert perf_counter() - t0 < 10
