"""Compare the compiled and pure-Python Fourier-Motzkin kernels.

Two measurements:

* kernel: ``eliminate_all`` (the pruned elimination behind every feasibility
  check) and single-column ``eliminate`` on seeded random integer systems,
  called directly on each backend module;
* end to end: the Fig. 3 full synthesis and a batch of instantiated opacity
  checks, each run in a subprocess with the backend forced through
  ``TIMED_OPACITY_PURE_PYTHON``.

Usage: python benchmarks/bench_kernels.py [--repeat N] [--systems N] [--seed S]
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import timeit
from pathlib import Path

from timed_opacity import _fm_py

try:
    from timed_opacity import _fm
except ImportError:  # pragma: no cover
    _fm = None

ROOT = Path(__file__).resolve().parent.parent
FIG3 = ROOT / "src" / "timed_opacity" / "fixtures" / "fig3.pta"


def random_systems(n: int, nvars: int, rows: int, seed: int):
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        sys_rows = [tuple(rng.randint(-4, 4) for _ in range(nvars)) + (rng.randint(-10, 10),) for _ in range(rows)]
        strict = [rng.random() < 0.3 for _ in range(rows)]
        out.append((sys_rows, strict))
    return out


def bench_kernel(mod, systems, nvars, repeat):
    def eliminate_all():
        for rows, strict in systems:
            mod.eliminate_all(rows, strict, nvars)

    def eliminate():
        for rows, strict in systems:
            mod.eliminate(rows, strict, 0)

    return (
        min(timeit.repeat(eliminate_all, number=1, repeat=repeat)),
        min(timeit.repeat(eliminate, number=1, repeat=repeat)),
    )


END_TO_END = """
from fractions import Fraction
from time import perf_counter
from timed_opacity import kernels
from timed_opacity.modelio import load
from timed_opacity.opacity import OpacityProblem, compute_opaque_times, synth_opacity
from timed_opacity.constraints import clear_caches
m = load({path!r}).pta
best_synth = best_times = float("inf")
for _ in range({repeat}):
    clear_caches()
    t0 = perf_counter()
    synth_opacity(OpacityProblem(m, "l_f"))
    best_synth = min(best_synth, perf_counter() - t0)
    clear_caches()
    t0 = perf_counter()
    for eps in range(4):
        for p in (1, Fraction(3, 2), 2):
            compute_opaque_times(OpacityProblem(m, "l_f", bindings={{"eps": eps, "p": p}}))
    best_times = min(best_times, perf_counter() - t0)
print(kernels.BACKEND, best_synth, best_times)
"""


def bench_end_to_end(pure: bool, repeat: int):
    env = dict(os.environ)
    if pure:
        env["TIMED_OPACITY_PURE_PYTHON"] = "1"
    else:
        env.pop("TIMED_OPACITY_PURE_PYTHON", None)
    code = END_TO_END.format(path=str(FIG3), repeat=repeat)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout
    backend, synth, times = out.split()
    return backend, float(synth), float(times)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--systems", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if _fm is None:
        print("compiled kernel not built; only the pure-Python backend is available")
    print(f"kernel calls ({args.systems} random systems, best of {args.repeat}):")
    print(f"{'vars x rows':>12} {'backend':>9} {'elim_all s':>11} {'eliminate s':>12}")
    for nvars, rows in ((3, 6), (4, 10), (5, 14), (6, 16)):
        systems = random_systems(args.systems, nvars, rows, args.seed)
        mods = [("python", _fm_py)] + ([("compiled", _fm)] if _fm is not None else [])
        results = {}
        for name, mod in mods:
            results[name] = bench_kernel(mod, systems, nvars, args.repeat)
            f, e = results[name]
            print(f"{f'{nvars} x {rows}':>12} {name:>9} {f:>11.4f} {e:>12.4f}")
        if len(results) == 2:
            (pf, pe), (cf, ce) = results["python"], results["compiled"]
            print(f"{'':>12} {'speedup':>9} {pf / cf:>10.1f}x {pe / ce:>11.1f}x")

    print()
    print(f"end to end on Fig. 3 (best of {args.repeat}):")
    print(f"{'backend':>9} {'synthesis s':>12} {'12 x times s':>13}")
    rows = [bench_end_to_end(True, args.repeat)]
    if _fm is not None:
        rows.append(bench_end_to_end(False, args.repeat))
    for backend, synth, times in rows:
        print(f"{backend:>9} {synth:>12.3f} {times:>13.3f}")
    if len(rows) == 2:
        print(f"{'speedup':>9} {rows[0][1] / rows[1][1]:>11.1f}x {rows[0][2] / rows[1][2]:>12.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
