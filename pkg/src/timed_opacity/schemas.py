"""JSON Schemas of the ``--format json`` output of every subcommand."""

from __future__ import annotations

RATIONAL = {"type": "string", "pattern": r"^-?[0-9]+(/[0-9]+)?$"}

ATOM = {
    "type": "object",
    "required": ["coeffs", "const", "rel"],
    "additionalProperties": False,
    "properties": {
        "coeffs": {"type": "object", "additionalProperties": RATIONAL},
        "const": RATIONAL,
        "rel": {"enum": ["<", "<=", "=", ">=", ">"]},
    },
}

POLYHEDRON = {"type": "array", "items": ATOM}
CONSTRAINT = {"type": "array", "items": POLYHEDRON}

INTERVAL = {
    "type": "object",
    "required": ["lo", "lo_closed", "hi", "hi_closed"],
    "additionalProperties": False,
    "properties": {
        "lo": RATIONAL,
        "lo_closed": {"type": "boolean"},
        "hi": {"oneOf": [RATIONAL, {"type": "null"}]},
        "hi_closed": {"type": "boolean"},
    },
}
INTERVALS = {"type": "array", "items": INTERVAL}
STATUS = {"enum": ["Opaque", "NotOpaque", "Inconclusive"]}


def _obj(required, **props):
    base = {"command": {"type": "string"}, "model": {"type": "string"}}
    base.update(props)
    return {
        "type": "object",
        "required": ["command", "model"] + list(required),
        "additionalProperties": False,
        "properties": base,
    }


SCHEMAS = {
    "reach": _obj(
        ["constraint", "text", "conclusive", "states"],
        constraint=CONSTRAINT,
        text={"type": "string"},
        conclusive={"type": "boolean"},
        states={"type": "integer"},
        targets={"type": "array", "items": {"type": "string"}},
    ),
    "synth": _obj(
        ["constraint", "text", "conclusive", "parameters"],
        constraint=CONSTRAINT,
        text={"type": "string"},
        conclusive={"type": "boolean"},
        states={"type": "integer"},
        parameters={"type": "array", "items": {"type": "string"}},
    ),
    "times": _obj(
        ["status", "visit", "avoid", "opaque_times", "conclusive"],
        status=STATUS,
        visit=INTERVALS,
        avoid=INTERVALS,
        opaque_times=INTERVALS,
        conclusive={"type": "boolean"},
    ),
    "check": _obj(["status", "conclusive"], status=STATUS, conclusive={"type": "boolean"}),
    "classify": _obj(
        ["lu"],
        lu={"type": "boolean"},
        lower={"type": "array", "items": {"type": "string"}},
        upper={"type": "array", "items": {"type": "string"}},
        parameter={"type": "string"},
        lower_use={"type": "string"},
        upper_use={"type": "string"},
    ),
    "empty": _obj(
        ["status"],
        status={"enum": ["Empty", "NonEmpty", "NotApplicable", "Inconclusive"]},
        witness={"oneOf": [{"type": "object", "additionalProperties": RATIONAL}, {"type": "null"}]},
        duration={"oneOf": [RATIONAL, {"type": "null"}]},
        reason={"type": "string"},
    ),
    "oracle": _obj(
        ["visit", "avoid", "exhausted"],
        visit={"type": "array", "items": RATIONAL},
        avoid={"type": "array", "items": RATIONAL},
        exhausted={"type": "boolean"},
    ),
    "dump-zonegraph": _obj(
        ["states", "transitions", "complete"],
        states={
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "location", "constraint", "text"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "integer"},
                    "location": {"type": "string"},
                    "constraint": POLYHEDRON,
                    "text": {"type": "string"},
                },
            },
        },
        transitions={
            "type": "array",
            "items": {
                "type": "object",
                "required": ["source", "target", "edge"],
                "additionalProperties": False,
                "properties": {
                    "source": {"type": "integer"},
                    "target": {"type": "integer"},
                    "edge": {"type": "integer"},
                },
            },
        },
        complete={"type": "boolean"},
    ),
}
