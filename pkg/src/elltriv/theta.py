"""Genus-one theta function, derivatives, characteristics and matrix series.

The basic object is

    theta(u) = sum_n exp(2 pi i (n^2 tau / 2 + n u)),

evaluated by direct summation over |n| <= N with N chosen from an explicit
tail bound on a declared working strip |Im u| <= strip.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import comb

from . import _jit
from .config import DEFAULT, NumericConfig
from .errors import PoleError, StripError
from .torus import EllipticCurve


def truncation_for(imag_tau: float, strip: float, tail_tol: float, log_growth: float = 0.0) -> int:
    """Smallest N whose tail bound exp(-pi Im(tau) N^2 + 2 pi N strip + N log_growth) < tail_tol.

    A margin of two terms covers the polynomial prefactors of derivative sums.
    """
    log_tol = math.log(tail_tol)
    n = max(1, int(math.ceil(strip / imag_tau)))
    while -math.pi * imag_tau * n * n + (2 * math.pi * strip + log_growth) * n >= log_tol:
        n += 1
    return n + 2


@dataclass(frozen=True)
class Characteristic:
    """Real characteristic (a, b), reduced modulo 1."""

    a: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a) % 1.0)
        object.__setattr__(self, "b", float(self.b) % 1.0)


HALF_HALF = Characteristic(0.5, 0.5)


class ThetaEvaluator:
    """Truncated theta series on the strip |Im u| <= strip."""

    def __init__(self, curve: EllipticCurve, tail_tol: float | None = None,
                 strip: float | None = None, nterms: int | None = None,
                 config: NumericConfig = DEFAULT):
        self.curve = curve
        self.tau = curve.tau
        self.config = config
        self.tail_tol = config.tail_tol if tail_tol is None else tail_tol
        self.strip = config.strip_factor * curve.tau.imag if strip is None else strip
        self.max_order = config.max_deriv_order
        self.nterms = nterms if nterms is not None else truncation_for(
            curve.tau.imag, self.strip, self.tail_tol)

    def doubled(self) -> "ThetaEvaluator":
        return ThetaEvaluator(self.curve, self.tail_tol, self.strip, 2 * self.nterms, self.config)

    def _check(self, z: np.ndarray):
        if z.size and np.max(np.abs(z.imag)) > self.strip * (1 + 1e-12):
            raise StripError(
                f"|Im u| = {np.max(np.abs(z.imag)):.3g} exceeds the working strip "
                f"{self.strip:.3g}; reduce the argument with quasi-periodicity first")

    def moments(self, z, kmax: int, shift: float = 0.0):
        """Sums of n**k exp(pi i tau n^2 + 2 pi i n z) over n in shift + Z, k = 0..kmax."""
        z = np.asarray(z, dtype=complex)
        self._check(z)
        nterms = self.nterms + (1 if shift else 0)
        out = _jit.theta_moments(z.ravel(), self.tau, shift, nterms, kmax)
        return out.reshape(z.shape + (kmax + 1,))

    def theta(self, u):
        out = self.moments(u, 0)[..., 0]
        return out if np.ndim(out) else complex(out)

    def deriv(self, u, k: int):
        if not 0 <= k <= self.max_order:
            raise ValueError(f"derivative order {k} outside 0..{self.max_order}")
        out = (2j * np.pi) ** k * self.moments(u, k)[..., k]
        return out if np.ndim(out) else complex(out)

    def derivs(self, u, kmax: int, ch: Characteristic | None = None):
        """theta^(k)(u) for k = 0..kmax, stacked on the last axis."""
        if kmax > self.max_order:
            raise ValueError(f"derivative order {kmax} outside 0..{self.max_order}")
        u = np.asarray(u, dtype=complex)
        if ch is None:
            mom = self.moments(u, kmax)
            scale = (2j * np.pi) ** np.arange(kmax + 1)
            return mom * scale
        mom = self.moments(u + ch.b, kmax, shift=ch.a)
        return mom * (2j * np.pi) ** np.arange(kmax + 1)

    def char(self, ch: Characteristic, z):
        """theta[a, b](z) = sum_m exp(pi i tau (m+a)^2 + 2 pi i (z+b)(m+a))."""
        z = np.asarray(z, dtype=complex)
        out = self.moments(z + ch.b, 0, shift=ch.a)[..., 0]
        return out if np.ndim(out) else complex(out)

    def char_deriv(self, ch: Characteristic, z, k: int):
        z = np.asarray(z, dtype=complex)
        out = (2j * np.pi) ** k * self.moments(z + ch.b, k, shift=ch.a)[..., k]
        return out if np.ndim(out) else complex(out)

    def log_derivs(self, u, kmax: int, ch: Characteristic | None = None):
        """Derivatives of log theta of orders 1..kmax (index 0 holds order 1)."""
        t = self.derivs(u, kmax, ch)
        ratios = t[..., 1:] / t[..., :1]
        g = np.zeros_like(ratios)
        for n in range(1, kmax + 1):
            acc = ratios[..., n - 1].copy()
            for k in range(1, n):
                acc -= comb(n - 1, k - 1, exact=True) * g[..., k - 1] * ratios[..., n - k - 1]
            g[..., n - 1] = acc
        return g

    @cached_property
    def odd_slope(self) -> complex:
        """theta[1/2, 1/2]'(0)."""
        return self.char_deriv(HALF_HALF, 0.0, 1)


def theta(ev: ThetaEvaluator, u):
    return ev.theta(u)


def theta_deriv(ev: ThetaEvaluator, u, k: int):
    return ev.deriv(u, k)


def theta_char(ev: ThetaEvaluator, ch: Characteristic, z):
    return ev.char(ch, z)


def theta_char_reduced(ev: ThetaEvaluator, ch: Characteristic, z):
    """Same value via exp(pi i tau a^2 + 2 pi i (z+b) a) theta(z + tau a + b)."""
    z = np.asarray(z, dtype=complex)
    a, b = ch.a, ch.b
    out = np.exp(1j * np.pi * ev.tau * a * a + 2j * np.pi * (z + b) * a) * ev.theta(z + ev.tau * a + b)
    return out if np.ndim(out) else complex(out)


class MatrixThetaSeries:
    """theta(u)^-1 sum_n V^-n exp(2 pi i (n^2 tau/2 + n u)) with cached powers of V."""

    def __init__(self, ev: ThetaEvaluator, V):
        V = np.atleast_2d(np.asarray(V, dtype=complex))
        if V.shape[0] != V.shape[1]:
            raise ValueError("V must be square")
        if np.linalg.cond(V) > 1e13:
            raise ValueError("V is numerically singular")
        self.ev = ev
        self.V = V
        Vinv = np.linalg.inv(V)
        growth = max(np.linalg.norm(V, 2), np.linalg.norm(Vinv, 2), 1.0)
        self.nterms = max(ev.nterms, truncation_for(
            ev.tau.imag, ev.strip, ev.tail_tol, 2 * math.log(growth) + math.log(V.shape[0]) + 1))
        r, N = V.shape[0], self.nterms
        powers = np.empty((2 * N + 1, r, r), dtype=complex)
        powers[N] = np.eye(r)
        for n in range(1, N + 1):
            powers[N + n] = Vinv @ powers[N + n - 1]
            powers[N - n] = V @ powers[N - n + 1]
        self.powers = powers

    def __call__(self, u):
        u = np.asarray(u, dtype=complex)
        self.ev._check(u)
        n = np.arange(-self.nterms, self.nterms + 1)
        flat = u.ravel()
        weights = np.exp(1j * np.pi * self.ev.tau * n**2 + 2j * np.pi * np.multiply.outer(flat, n))
        num = np.tensordot(weights, self.powers, axes=(1, 0))
        den = self.ev.theta(flat)
        den = np.atleast_1d(den)
        scale = np.abs(weights).max(axis=1)
        if np.any(np.abs(den) < 1e-13 * scale):
            raise PoleError("matrix theta series evaluated at a zero of theta")
        out = num / den[:, None, None]
        return out.reshape(u.shape + self.V.shape)


def matrix_theta_triv(ev: ThetaEvaluator, V, u):
    return MatrixThetaSeries(ev, V)(u)


def theta_invariants(curve: EllipticCurve, samples: int = 20, seed: int = 0,
                     ev: ThetaEvaluator | None = None) -> dict:
    """Quasi-periodicity, evenness, the half-period zero and truncation-doubling stability.

    Each identity lhs = rhs is scored as |lhs - rhs| / max(|lhs|, |rhs|) at
    uniformly sampled u in the fundamental parallelogram.
    """
    ev = ev or ThetaEvaluator(curve)
    rng = np.random.default_rng(seed)
    s, t = rng.random(samples), rng.random(samples)
    u = s + t * curve.tau
    base = ev.theta(u)
    mag = np.abs(base)

    def rel(lhs, rhs):
        return np.abs(lhs - rhs) / np.maximum(np.abs(lhs), np.abs(rhs))

    shift_one = rel(ev.theta(u + 1), base)
    factor = np.exp(-1j * np.pi * curve.tau - 2j * np.pi * u)
    shift_tau = rel(ev.theta(u + curve.tau), factor * base)
    even = rel(ev.theta(-u), base)
    fine = ev.doubled()
    doubling = np.abs(fine.theta(u) - base) / np.maximum(mag, 1.0)
    return {
        "quasi_periodicity": float(max(shift_one.max(), shift_tau.max())),
        "evenness": float(even.max()),
        "half_period_zero": float(abs(ev.theta(curve.half_period))),
        "doubling": float(doubling.max()),
        "nterms": ev.nterms,
    }
