"""JSON run configuration: schema, presets and validation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from .errors import SchemaError
from .linalg import PAULI_X, PAULI_Y, PAULI_Z
from .model import DEMO_RATES, FAMILIES, CoefficientFn, MasterEquation, basis_state, pauli_model
from .rateop import StateScaled, TargetBasis, Zero

MODES = ("exact", "jump", "nmqj", "witness", "compare")

NAMED_OPERATORS = {
    "sigma_x": PAULI_X,
    "sigma_y": PAULI_Y,
    "sigma_z": PAULI_Z,
    "sigma_plus": np.array([[0, 1], [0, 0]], dtype=complex),
    "sigma_minus": np.array([[0, 0], [1, 0]], dtype=complex),
    "identity": np.eye(2, dtype=complex),
}

PRESETS = {
    # generic Pauli model; rates default to zero
    "pauli": {},
    "pauli_uniform": {"gx": 1.0, "gy": 1.0, "gz": 1.0, "beta": 1.0},
    "dephasing": {"gz": 1.0},
    "unphysical_dephasing": {"gz": -0.5},
    "pauli_nonPdiv_demo": DEMO_RATES,
}

_number = {"type": "number"}
_complex = {
    "oneOf": [
        _number,
        {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
    ]
}
_coefficient = {
    "oneOf": [
        _number,
        {
            "type": "object",
            "required": ["family"],
            "properties": {
                "family": {"enum": sorted(FAMILIES)},
                "c": _number,
                "a": _number,
                "omega": _number,
                "phase": _number,
                "offset": _number,
                "s": _number,
                "coeffs": {"type": "array", "items": _number, "minItems": 1},
                "samples": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
                },
            },
            "additionalProperties": False,
        },
    ]
}
_matrix = {
    "oneOf": [
        {"enum": sorted(NAMED_OPERATORS)},
        {"type": "array", "minItems": 2, "items": {"type": "array", "items": _complex}},
    ]
}
_vector = {"type": "array", "minItems": 2, "items": _complex}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["model"],
    "additionalProperties": False,
    "properties": {
        "mode": {"enum": list(MODES)},
        "model": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "preset": {"enum": sorted(PRESETS)},
                "gx": _coefficient,
                "gy": _coefficient,
                "gz": _coefficient,
                "beta": _coefficient,
                "dim": {"type": "integer", "minimum": 2, "maximum": 16},
                "hamiltonian": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["matrix"],
                        "additionalProperties": False,
                        "properties": {"coefficient": _coefficient, "matrix": _matrix},
                    },
                },
                "channels": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["rate", "operator"],
                        "additionalProperties": False,
                        "properties": {"rate": _coefficient, "operator": _matrix},
                    },
                },
            },
        },
        "initial_state": {
            "oneOf": [
                {"enum": ["zero", "one", "plus", "minus", "plus_i", "minus_i"]},
                _vector,
            ]
        },
        "strategy": {
            "type": "object",
            "required": ["type"],
            "additionalProperties": False,
            "properties": {
                "type": {"enum": ["zero", "state_scaled", "target_basis"]},
                "c": _complex,
                "basis": {"type": "array", "minItems": 2, "maxItems": 2, "items": _vector},
            },
        },
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "t_max": {"type": "number", "exclusiveMinimum": 0},
        "n_traj": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "threads": {"type": "integer", "minimum": 1},
        "record_every": {"type": "integer", "minimum": 1},
        "max_event_prob": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "compare": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_sigma": {"type": "number", "exclusiveMinimum": 0},
                "floor": {"type": "number", "minimum": 0},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "trajectory_csv": {"type": "string"},
                "populations_csv": {"type": "string"},
                "plot_svg": {"type": "string"},
                "summary_json": {"type": "string"},
            },
        },
    },
}

DEFAULT_OUTPUT = {
    "dir": "out",
    "trajectory_csv": "trajectory.csv",
    "populations_csv": "populations.csv",
    "plot_svg": "bloch.svg",
    "summary_json": "summary.json",
}


@dataclass
class RunConfig:
    model: dict
    mode: str = "exact"
    initial_state: object = "plus"
    strategy: dict = field(default_factory=lambda: {"type": "zero"})
    dt: float = 1e-3
    t_max: float = 1.0
    n_traj: int = 1000
    seed: int = 0
    threads: int = 1
    record_every: int = 10
    max_event_prob: float = 0.1
    compare: dict = field(default_factory=lambda: {"n_sigma": 5.0, "floor": 0.02})
    output: dict = field(default_factory=lambda: dict(DEFAULT_OUTPUT))

    def build_model(self):
        return build_model(self.model)

    def build_strategy(self):
        return build_strategy(self.strategy)

    def psi0(self):
        return to_vector(self.initial_state)


def _path(error):
    return "/".join(str(p) for p in error.absolute_path)


def _to_complex(value):
    if isinstance(value, (list, tuple)):
        return complex(value[0], value[1])
    return complex(value)


def to_vector(entry):
    if isinstance(entry, str):
        return basis_state(entry)
    v = np.array([_to_complex(x) for x in entry])
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("initial state is the zero vector")
    return v / n


def to_matrix(entry):
    if isinstance(entry, str):
        return NAMED_OPERATORS[entry]
    return np.array([[_to_complex(x) for x in row] for row in entry])


def build_model(entry):
    entry = dict(entry)
    preset = entry.pop("preset", None)
    if preset is not None:
        params = {"gx": 0.0, "gy": 0.0, "gz": 0.0, "beta": 0.0}
        params.update(PRESETS[preset])
        params.update({k: v for k, v in entry.items() if k in params})
        return pauli_model(**{k: CoefficientFn.coerce(v) for k, v in params.items()})
    dim = entry["dim"]
    ham = [(h.get("coefficient", 1.0), to_matrix(h["matrix"])) for h in entry.get("hamiltonian", [])]
    chans = [(c["rate"], to_matrix(c["operator"])) for c in entry.get("channels", [])]
    return MasterEquation.build(dim, ham, chans)


def build_strategy(entry):
    kind = entry["type"]
    if kind == "zero":
        return Zero()
    if kind == "state_scaled":
        return StateScaled(_to_complex(entry.get("c", 1.0)))
    basis = entry.get("basis")
    if basis is None:
        return TargetBasis()
    return TargetBasis(tuple(tuple(to_vector(v)) for v in basis))


def _semantic_errors(data):
    errors = []
    model = data.get("model", {})
    pauli_keys = {"gx", "gy", "gz", "beta"} & set(model)
    inline_keys = {"dim", "hamiltonian", "channels"} & set(model)
    if "preset" in model:
        if inline_keys:
            errors.append(("model", f"preset models cannot also set {sorted(inline_keys)}"))
    else:
        if pauli_keys:
            errors.append(("model", f"{sorted(pauli_keys)} require a preset"))
        if "dim" not in model:
            errors.append(("model", "either 'preset' or 'dim' is required"))
    dim = 2 if "preset" in model else model.get("dim")
    if dim is not None:
        for key in ("hamiltonian", "channels"):
            for k, item in enumerate(model.get(key, [])):
                mat = item.get("matrix" if key == "hamiltonian" else "operator")
                if isinstance(mat, str):
                    if dim != 2:
                        errors.append((f"model/{key}/{k}", "named operators are 2x2"))
                elif len(mat) != dim or any(len(row) != dim for row in mat):
                    errors.append((f"model/{key}/{k}", f"matrix must be {dim}x{dim}"))
        if dim != 2:
            errors.append(("model/dim", "the command-line tool reports Bloch vectors and needs dim 2"))
        state = data.get("initial_state")
        if isinstance(state, list) and len(state) != dim:
            errors.append(("initial_state", f"expected {dim} amplitudes"))
    if "dt" in data and "t_max" in data and data["dt"] > 0:
        ratio = data["t_max"] / data["dt"]
        if abs(ratio - round(ratio)) > 1e-6 * max(1.0, ratio):
            errors.append(("t_max", "must be a whole number of steps dt"))
    return errors


def parse_config(text, overrides=None):
    """Validate JSON text and return a :class:`RunConfig`.

    All schema violations are collected and raised together as a
    :class:`SchemaError` listing each offending key path.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError([("", f"invalid JSON: {exc}")]) from None
    if overrides:
        data.update({k: v for k, v in overrides.items() if v is not None})
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = [(_path(e), e.message) for e in sorted(validator.iter_errors(data), key=str)]
    if not errors:
        errors = _semantic_errors(data)
    if errors:
        raise SchemaError(errors)
    output = dict(DEFAULT_OUTPUT)
    output.update(data.pop("output", {}))
    compare = {"n_sigma": 5.0, "floor": 0.02}
    compare.update(data.pop("compare", {}))
    cfg = RunConfig(output=output, compare=compare, **data)
    try:
        cfg.build_model()
        cfg.build_strategy()
        cfg.psi0()
    except (ValueError, KeyError) as exc:
        raise SchemaError([("model", str(exc))]) from None
    return cfg
