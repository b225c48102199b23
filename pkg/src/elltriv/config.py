"""Central numeric configuration.

Every tolerance used by the library lives on :class:`NumericConfig`.  Modules
take an optional ``config`` argument and fall back to :data:`DEFAULT`.
"""
from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass

CONFIG_ENV_VAR = "ELLTRIV_CONFIG"


@dataclass(frozen=True)
class NumericConfig:
    # theta series
    tail_tol: float = 1e-12
    strip_factor: float = 4.0  # working strip is |Im u| <= strip_factor * Im(tau)
    max_deriv_order: int = 8
    # torus
    lattice_tol: float = 1e-9
    # contour quadrature
    contour_radius: float = 0.1
    contour_nodes: int = 128
    contour_doubling_tol: float = 1e-9
    winding_tol: float = 0.1
    # linear algebra
    rank_rtol: float = 1e-8
    nilpotent_tol: float = 1e-10
    kernel_gap: float = 1e-6
    sylvester_tol: float = 1e-10
    # membership and interpolation
    membership_tol: float = 1e-7
    gamma_cond_max: float = 1e12
    gamma_sv_rtol: float = 1e-10
    side_rtol: float = 1e-6
    d0_margin: float = 0.05
    # sampling and verification
    pole_margin: float = 0.05
    automorphy_tol: float = 1e-7

    def replace(self, **changes) -> "NumericConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


DEFAULT = NumericConfig()


def load_config(path: str | None = None) -> NumericConfig:
    """Load overrides from a JSON file; ``path`` defaults to ``$ELLTRIV_CONFIG``."""
    path = path or os.environ.get(CONFIG_ENV_VAR)
    if not path:
        return DEFAULT
    with open(path) as fh:
        overrides = json.load(fh)
    known = {f.name for f in dataclasses.fields(NumericConfig)}
    unknown = set(overrides) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return DEFAULT.replace(**overrides)
