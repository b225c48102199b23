"""Arithmetic on the torus C / (Z + tau Z)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT


@dataclass(frozen=True)
class EllipticCurve:
    """The lattice Z + tau Z with Im(tau) > 0."""

    tau: complex

    def __post_init__(self):
        tau = complex(self.tau)
        if not tau.imag > 0:
            raise ValueError(f"tau must have positive imaginary part, got {tau}")
        object.__setattr__(self, "tau", tau)

    @property
    def half_period(self) -> complex:
        """(1 + tau)/2, the zero of the theta function."""
        return 0.5 + 0.5 * self.tau

    def coords(self, u):
        """Real coordinates (s, t) with u = s + t*tau.  Works on arrays."""
        u = np.asarray(u, dtype=complex)
        t = u.imag / self.tau.imag
        s = u.real - t * self.tau.real
        if u.ndim == 0:
            return float(s), float(t)
        return s, t

    def from_coords(self, s, t):
        return s + t * self.tau

    def point(self, s: float, t: float) -> "TorusPoint":
        return reduce(self, self.from_coords(s, t))


@dataclass(frozen=True)
class TorusPoint:
    """Canonical representative s + t*tau with s, t in [0, 1)."""

    rep: complex
    curve: EllipticCurve

    @property
    def coords(self) -> tuple[float, float]:
        return self.curve.coords(self.rep)

    def __complex__(self):
        return self.rep

    def same_as(self, other, tol: float = DEFAULT.lattice_tol) -> bool:
        return lattice_equivalent(self.curve, self.rep, complex(other), tol)


def _unit_interval(x: float) -> float:
    x = x - math.floor(x)
    return 0.0 if x >= 1.0 else x


def reduce(curve: EllipticCurve, u: complex) -> TorusPoint:
    """Reduce ``u`` to the half-open fundamental parallelogram."""
    s, t = curve.coords(complex(u))
    s, t = _unit_interval(s), _unit_interval(t)
    return TorusPoint(complex(s + t * curve.tau), curve)


def lattice_offset(curve: EllipticCurve, u: complex) -> tuple[float, float]:
    """Signed distance of ``u`` from the nearest lattice point, in basis coordinates."""
    s, t = curve.coords(complex(u))
    return s - round(s), t - round(t)


def lattice_equivalent(curve: EllipticCurve, u: complex, v: complex,
                       tol: float = DEFAULT.lattice_tol) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    ds, dt = lattice_offset(curve, complex(u) - complex(v))
    return abs(ds) <= tol and abs(dt) <= tol


def lattice_distance(curve: EllipticCurve, u: complex, v: complex) -> float:
    """Euclidean distance from u to the nearest lattice translate of v."""
    return abs(nearest_image(curve, complex(u), complex(v)) - complex(u))


def deck_translate(curve: EllipticCurve, u: complex, m: int, n: int) -> complex:
    return complex(u) + m + n * curve.tau


def nearest_image(curve: EllipticCurve, target: complex, u: complex) -> complex:
    """The lattice translate of ``u`` closest to ``target``."""
    d = complex(u) - complex(target)
    s, t = curve.coords(d)
    best, best_val = math.inf, complex(u)
    for n in (math.floor(t), math.floor(t) + 1):
        for m in (math.floor(s - 1), math.floor(s), math.floor(s) + 1, math.floor(s) + 2):
            cand = complex(u) - m - n * curve.tau
            dist = abs(cand - target)
            if dist < best:
                best, best_val = dist, cand
    return best_val
