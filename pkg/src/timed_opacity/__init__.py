"""Timed-opacity analysis and parameter synthesis for parametric timed automata."""

from __future__ import annotations

from .constraints import (
    Atom,
    ConstraintSet,
    LinearTerm,
    Polyhedron,
    VarEnv,
    conjoin,
    eliminate,
    includes,
    instantiate,
    is_satisfiable,
    project_params,
    reset,
    set_intersection,
    set_is_empty,
    set_union,
    time_elapse,
)
from .errors import (
    BudgetError,
    MissingParameterError,
    ModelError,
    MultiVariableError,
    OpacityError,
    ParseError,
    UnknownVariableError,
)
from .intervals import Interval, IntervalSet, to_intervals
from .modelio import Model, load, parse, serialize
from .opacity import (
    OpacityProblem,
    OpacityVerdict,
    SynthesisResult,
    compute_opaque_times,
    enrich,
    lu_emptiness,
    self_compose,
    synth_opacity,
)
from .oracle import OracleResult, Run, explore_durations, replay, run_duration, step
from .pta import PTA, Edge, Guard, Parameter, classify_lu, expand_discrete, instantiate_model, lu_abstraction, product
from .symbolic import Budget, SymbolicState, ZoneGraph, efsynth, explore, initial_state, successor

__version__ = "0.1.0"
