"""Command-line front end.

Exit status: 0 for a conclusive result, 2 when an exploration budget was hit
(the partial result printed is still sound), 1 for usage, parse and model
errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

from .constraints import format_rational
from .errors import OpacityError
from .modelio import Model, load
from .opacity import OpacityProblem, compute_opaque_times, lu_emptiness, synth_opacity
from .oracle import explore_durations
from .pta import LU, classify_lu, expand_discrete, instantiate_model
from .symbolic import Budget, efsynth, explore

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 2

DEFAULT_MAX_STATES = 100_000


class UsageError(Exception):
    pass


def _binding(text: str):
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise argparse.ArgumentTypeError(f"expected NAME=RATIONAL, got {text!r}")
    try:
        q = Fraction(value.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {value!r}") from None
    return name.strip(), q


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("model", help="model file (.pta)")
    common.add_argument("--bind", action="append", type=_binding, default=[], metavar="NAME=RATIONAL",
                        help="fix a parameter value (repeatable)")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--max-depth", type=_positive, default=None)
    common.add_argument("--max-states", type=_positive, default=DEFAULT_MAX_STATES)
    common.add_argument("-v", "--verbose", action="store_true", help="print parser notes on stderr")

    opacity = argparse.ArgumentParser(add_help=False)
    opacity.add_argument("--priv", action="append", default=[], metavar="LOC",
                         help="private location (repeatable; adds to those marked in the model)")
    opacity.add_argument("--final", default=None, metavar="LOC",
                         help="final location (defaults to the one marked in the model)")

    p = argparse.ArgumentParser(prog="timed-opacity", description="Timed-opacity analysis of parametric timed automata")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("reach", parents=[common], help="parameter valuations reaching a target location")
    r.add_argument("--target", action="append", default=[], required=True, metavar="LOC")
    sub.add_parser("times", parents=[common, opacity], help="duration sets and opaque execution times")
    sub.add_parser("check", parents=[common, opacity], help="opacity status only")
    s = sub.add_parser("synth", parents=[common, opacity], help="synthesize opaque parameter valuations")
    s.add_argument("--project", default=None, metavar="P1,P2,...", help="parameters kept in the result")
    sub.add_parser("classify", parents=[common], help="L/U classification of the parameters")
    sub.add_parser("empty", parents=[common, opacity], help="L/U opacity emptiness")
    o = sub.add_parser("oracle", parents=[common, opacity], help="brute-force duration enumeration")
    o.add_argument("--grid", type=_positive, default=2, help="delays are multiples of 1/GRID")
    o.add_argument("--time-bound", type=_rational, default=None)
    sub.add_parser("dump-zonegraph", parents=[common], help="print the parametric zone graph")
    return p


def _budget(args) -> Budget:
    return Budget(args.max_depth, args.max_states)


def _problem(args, model: Model, projection=None) -> OpacityProblem:
    final = args.final or model.final
    if final is None:
        raise UsageError("--final is required (the model marks no final location)")
    return OpacityProblem(model.pta, final, frozenset(args.priv), dict(args.bind), projection)


def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return _dispatch(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OpacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def _dispatch(args) -> int:
    model = load(args.model)
    if args.verbose:
        for note in model.notes:
            print(f"note: {note}", file=sys.stderr)
    base = {"command": args.command, "model": model.pta.name}
    cmd = args.command

    if cmd == "reach":
        a = instantiate_model(model.pta, dict(args.bind))
        x = expand_discrete(a)
        origin = x.origin
        for t in args.target:
            if t not in a.locations:
                raise UsageError(f"unknown target location {t!r}")
        wanted = set(args.target)
        res = efsynth(x, lambda loc: origin[loc][0] in wanted, _budget(args))
        res.constraint = res.constraint.merged()
        payload = dict(base, constraint=res.constraint.to_json(), text=str(res.constraint),
                       conclusive=res.conclusive, states=res.states, targets=list(args.target))
        _emit(args, payload, str(res.constraint))
        return EXIT_OK if res.conclusive else EXIT_INCONCLUSIVE

    if cmd in ("times", "check"):
        v = compute_opaque_times(_problem(args, model), _budget(args))
        if cmd == "check":
            _emit(args, dict(base, status=v.status, conclusive=v.conclusive), v.status)
        else:
            text = "\n".join([
                f"status: {v.status}",
                f"visit: {v.visit}",
                f"avoid: {v.avoid}",
                f"opaque_times: {v.opaque_times}",
            ])
            payload = dict(base, status=v.status, visit=v.visit.to_json(), avoid=v.avoid.to_json(),
                           opaque_times=v.opaque_times.to_json(), conclusive=v.conclusive)
            _emit(args, payload, text)
        return EXIT_OK if v.conclusive else EXIT_INCONCLUSIVE

    if cmd == "synth":
        projection = None
        if args.project is not None:
            projection = tuple(n.strip() for n in args.project.split(",") if n.strip())
        res = synth_opacity(_problem(args, model, projection), _budget(args))
        payload = dict(base, constraint=res.constraint.to_json(), text=str(res.constraint),
                       conclusive=res.conclusive, states=res.states, parameters=list(res.constraint.env.names))
        _emit(args, payload, str(res.constraint))
        return EXIT_OK if res.conclusive else EXIT_INCONCLUSIVE

    if cmd == "classify":
        c = classify_lu(instantiate_model(model.pta, dict(args.bind)))
        if isinstance(c, LU):
            lower, upper = sorted(c.lower), sorted(c.upper)
            text = f"LU lower={{{', '.join(lower)}}} upper={{{', '.join(upper)}}}"
            payload = dict(base, lu=True, lower=lower, upper=upper)
        else:
            text = f"NotLU parameter={c.parameter}\n  lower use: {c.lower_use}\n  upper use: {c.upper_use}"
            payload = dict(base, lu=False, parameter=c.parameter, lower_use=str(c.lower_use), upper_use=str(c.upper_use))
        _emit(args, payload, text)
        return EXIT_OK

    if cmd == "empty":
        r = lu_emptiness(_problem(args, model), _budget(args))
        witness = None if r.witness is None else {k: format_rational(v) for k, v in r.witness.items()}
        duration = None if r.duration is None else format_rational(r.duration)
        lines = [r.status]
        if r.duration is not None:
            lines.append(f"duration: {duration}")
        if witness:
            lines.append("witness: " + ", ".join(f"{k}={v}" for k, v in witness.items()))
        if r.reason:
            lines.append(f"reason: {r.reason}")
        payload = dict(base, status=r.status, witness=witness, duration=duration, reason=r.reason)
        _emit(args, payload, "\n".join(lines))
        return EXIT_INCONCLUSIVE if r.status == "Inconclusive" else EXIT_OK

    if cmd == "oracle":
        problem = _problem(args, model)
        a = problem.bound_model()
        res = explore_durations(a, problem.private, problem.final, args.grid, args.time_bound, args.max_depth)
        visit = [format_rational(d) for d in sorted(res.visit_durations)]
        avoid = [format_rational(d) for d in sorted(res.avoid_durations)]
        text = "\n".join([
            f"visit: {' '.join(visit) if visit else '{}'}",
            f"avoid: {' '.join(avoid) if avoid else '{}'}",
            f"exhausted: {'yes' if res.exhausted else 'no'}",
        ])
        _emit(args, dict(base, visit=visit, avoid=avoid, exhausted=res.exhausted), text)
        return EXIT_OK if res.exhausted else EXIT_INCONCLUSIVE

    # dump-zonegraph
    g = explore(expand_discrete(instantiate_model(model.pta, dict(args.bind))), _budget(args))
    payload = dict(
        base,
        states=[{"id": i, "location": s.location, "constraint": s.zone.to_json(), "text": str(s.zone)}
                for i, s in enumerate(g.states)],
        transitions=[{"source": a, "target": b, "edge": k} for a, k, b in g.transitions],
        complete=g.complete,
    )
    _emit(args, payload, g.dump())
    return EXIT_OK if g.complete else EXIT_INCONCLUSIVE


def main(argv: Optional[Sequence[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":  # pragma: no cover
    main()
