"""Scenario files: JSON loading, schema validation and conversion to library objects.

Conventions: complex numbers are [re, im]; torus points are lattice
coordinates [s, t] meaning s + t tau, reduced to the fundamental domain on
load; matrices are row-major nested arrays of [re, im].
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import jsonschema
import numpy as np

from .config import NumericConfig, load_config
from .divisors import BaseDivisor, MatrixDivisor
from .errors import ElltrivError
from .nullpole import SylvesterDataSet
from .torus import EllipticCurve, TorusPoint, reduce


class ScenarioError(ElltrivError, ValueError):
    """Malformed or schema-violating scenario input."""


def schema() -> dict:
    text = resources.files("elltriv").joinpath("schema/scenario.schema.json").read_text()
    return json.loads(text)


@dataclass
class Scenario:
    raw: dict
    curve: EllipticCurve
    pipeline: str
    seed: int
    config: NumericConfig
    inputs: dict = field(default_factory=dict)
    samples: dict | None = None


def validate(doc: dict) -> None:
    validator = jsonschema.Draft7Validator(schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        lines = [f"{'/'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}" for e in errors]
        raise ScenarioError("scenario does not match the schema:\n  " + "\n  ".join(lines))


def from_dict(doc: dict, seed: int | None = None, base_config: NumericConfig | None = None) -> Scenario:
    validate(doc)
    tau = to_complex(doc["tau"])
    try:
        curve = EllipticCurve(tau)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc
    cfg = base_config or load_config()
    try:
        cfg = cfg.replace(**doc.get("config", {}))
    except TypeError as exc:
        raise ScenarioError(f"unknown config key: {exc}") from exc
    return Scenario(doc, curve, doc["pipeline"], doc.get("seed", 0) if seed is None else seed, cfg,
                    dict(doc.get("inputs", {})), doc.get("samples"))


def load_scenario(path: str, seed: int | None = None) -> Scenario:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    return from_dict(doc, seed)


# -- conversions ---------------------------------------------------------------

def to_complex(pair) -> complex:
    return complex(float(pair[0]), float(pair[1]))


def to_point(curve: EllipticCurve, st) -> TorusPoint:
    return reduce(curve, curve.from_coords(float(st[0]), float(st[1])))


def to_matrix(rows) -> np.ndarray:
    if not rows:
        return np.zeros((0, 0), dtype=complex)
    return np.array([[to_complex(x) for x in row] for row in rows], dtype=complex)


def complex_list(z) -> list:
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        return [float(z.real), float(z.imag)]
    return [complex_list(x) for x in z]


def parse_divisor(curve: EllipticCurve, spec: dict) -> MatrixDivisor:
    r = spec["rank"]
    entries = []
    for item in spec["entries"]:
        kw = {k: to_matrix(item[k]) for k in ("Bz", "Az", "Api", "Cpi", "S") if k in item}
        try:
            T = SylvesterDataSet.build(r, **kw)
        except ValueError as exc:
            raise ScenarioError(f"triple at {item['point']}: {exc}") from exc
        entries.append((to_point(curve, item["point"]), T))
    try:
        return MatrixDivisor(curve, r, entries)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def parse_base(curve: EllipticCurve, spec: dict) -> BaseDivisor:
    try:
        return BaseDivisor(curve, to_point(curve, spec["p1"]), to_point(curve, spec["p0"]))
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def require(inputs: dict, *keys):
    missing = [k for k in keys if k not in inputs]
    if missing:
        raise ScenarioError(f"missing inputs: {', '.join(missing)}")
