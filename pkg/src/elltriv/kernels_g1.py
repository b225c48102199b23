"""Prime form, flat line bundle Cauchy kernels and the canonical functions f_kw.

Conventions at genus one: the Abel-Jacobi map is the identity on
representatives and dz trivializes the half-differentials, so

    E(p, q)      = theta[1/2,1/2](q - p) / theta[1/2,1/2]'(0),
    K(chi; p, q) = theta[a,b](q - p) / (theta[a,b](0) E(q, p)),

where K has a simple pole at p = q with residue +1 as a function of p.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from .config import DEFAULT, NumericConfig
from .divisors import BaseDivisor
from .errors import ElltrivError
from .numerics import ContourSpec, laurent_coefficients
from .theta import HALF_HALF, Characteristic, ThetaEvaluator
from .torus import EllipticCurve

# Relative automorphy of p -> K(chi; p, q), fixed by direct evaluation:
#   K(p + 1, q)   = KERNEL_SHIFT_ONE * exp(-2 pi i a) K(p, q)
#   K(p + tau, q) = KERNEL_SHIFT_TAU * exp(+2 pi i b) K(p, q)
KERNEL_SHIFT_ONE = -1.0
KERNEL_SHIFT_TAU = -1.0

# be = p1 - p0 + BASE_SHIFT * (1 + tau)/2 places the extra pole of f_w at p1.
BASE_SHIFT = 1


@dataclass(frozen=True)
class FlatLineBundle:
    """Unitary flat bundle with chi(A) = exp(-2 pi i a), chi(B) = exp(2 pi i b)."""

    curve: EllipticCurve
    a: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a) % 1.0)
        object.__setattr__(self, "b", float(self.b) % 1.0)

    @property
    def be(self) -> complex:
        return self.b + self.curve.tau * self.a

    @property
    def characteristic(self) -> Characteristic:
        return Characteristic(self.a, self.b)

    @classmethod
    def from_be(cls, curve: EllipticCurve, be: complex) -> "FlatLineBundle":
        a, b = curve.coords(complex(be))[::-1]
        return cls(curve, a, b)

    def dual(self) -> "FlatLineBundle":
        return FlatLineBundle(self.curve, -self.a, -self.b)


class PrimeForm:
    def __init__(self, curve: EllipticCurve, ev: ThetaEvaluator | None = None):
        self.curve = curve
        self.ev = ev or ThetaEvaluator(curve)
        self.slope = self.ev.odd_slope

    def __call__(self, p, q):
        return self.ev.char(HALF_HALF, np.asarray(q, dtype=complex) - p) / self.slope

    def odd_theta(self, z):
        return self.ev.char(HALF_HALF, z)


def prime_form(ev: ThetaEvaluator, p, q):
    return PrimeForm(ev.curve, ev)(p, q)


def _theta_be(ev, be):
    val = ev.theta(be)
    scale = np.exp(np.pi * abs(complex(be).imag) ** 2 / ev.tau.imag)
    if abs(val) < 1e-10 * scale:
        raise ElltrivError("degenerate bundle: theta(be) vanishes; choose a different base divisor")
    return val


def cauchy_kernel(ev: ThetaEvaluator, bundle: FlatLineBundle, p, q):
    """theta[a,b](q-p) / (theta[a,b](0) E(q, p))."""
    _theta_be(ev, bundle.be)
    E = PrimeForm(ev.curve, ev)
    ch = bundle.characteristic
    z = np.asarray(q, dtype=complex) - p
    return ev.char(ch, z) / (ev.char(ch, 0.0) * E(q, p))


def cauchy_kernel_alt(ev: ThetaEvaluator, bundle: FlatLineBundle, p, q):
    """exp(2 pi i a (q-p)) theta(q - p + be) / (theta(be) E(q, p))."""
    be = bundle.be
    tb = _theta_be(ev, be)
    E = PrimeForm(ev.curve, ev)
    z = np.asarray(q, dtype=complex) - p
    return np.exp(2j * np.pi * bundle.a * z) * ev.theta(z + be) / (tb * E(q, p))


def base_bundle(D0: BaseDivisor) -> FlatLineBundle:
    curve = D0.curve
    be = D0.p1.rep - D0.p0.rep + BASE_SHIFT * curve.half_period
    return FlatLineBundle.from_be(curve, be)


class CanonicalFunctions:
    """f_kw(p) for a base divisor D0 = p1 - p0: the elliptic functions with
    principal part (p - w)^-k at w, a zero at p0 and at most a simple pole at p1.
    """

    def __init__(self, D0: BaseDivisor, ev: ThetaEvaluator | None = None,
                 config: NumericConfig = DEFAULT):
        self.D0 = D0
        self.curve = D0.curve
        self.ev = ev or ThetaEvaluator(self.curve)
        self.config = config
        self.E = PrimeForm(self.curve, self.ev)
        self.bundle = base_bundle(D0)
        self.be = self.bundle.be
        self.theta_be = _theta_be(self.ev, self.be)
        self.p0 = D0.p0.rep
        self.p1 = D0.p1.rep

    # kernels in the bundle of D0
    def K(self, p, q):
        return cauchy_kernel(self.ev, self.bundle, p, q)

    def f_w(self, w, p):
        """K(p, w) K(w, p0) / K(p, p0)."""
        p = np.asarray(p, dtype=complex)
        return self.K(p, w) * self.K(w, self.p0) / self.K(p, self.p0)

    def f_w_expanded(self, w, p):
        """The same function written with theta and prime forms only."""
        ev, E, be = self.ev, self.E, self.be
        p = np.asarray(p, dtype=complex)
        return (ev.theta(w - p + be) / E(w, p) * E(self.p0, p) / ev.theta(self.p0 - p + be)
                * ev.theta(self.p0 - w + be) / E(self.p0, w) / self.theta_be)

    def f_w_direct(self, w, p):
        """C theta1(p-p0) theta1(p-q*) / (theta1(p-w) theta1(p-p1)) with q* = w + p1 - p0."""
        t1 = self.E.odd_theta
        p = np.asarray(p, dtype=complex)
        qstar = w + self.p1 - self.p0
        C = self.E.slope * t1(w - self.p1) / (t1(w - self.p0) * t1(w - qstar))
        return C * t1(p - self.p0) * t1(p - qstar) / (t1(p - w) * t1(p - self.p1))

    def _log_h_derivs(self, w, p, n):
        """Derivatives 1..n in w of log theta(w-p+be) theta(p0-w+be) / (theta1(p-w) theta1(w-p0))."""
        ev, be, p0 = self.ev, self.be, self.p0
        p = np.asarray(p, dtype=complex)
        sign = (-1.0) ** np.arange(1, n + 1)
        g1 = ev.log_derivs(w - p + be, n)
        g2 = ev.log_derivs(p0 - w + be, n) * sign
        g3 = ev.log_derivs(p - w, n, HALF_HALF) * sign
        g4 = ev.log_derivs(np.full(p.shape, w - p0), n, HALF_HALF)
        return g1 + g2 - g3 - g4

    def f_kw(self, k: int, w, p):
        """(1/(k-1)!) d^(k-1)/dw^(k-1) f_w(p), by Bell polynomials of log-derivatives."""
        if not 1 <= k <= 6:
            raise ValueError("k must be in 1..6")
        base = self.f_w(w, p)
        if k == 1:
            return base
        ell = self._log_h_derivs(w, p, k - 1)
        B = [np.ones_like(ell[..., 0])]
        for n in range(1, k):
            acc = np.zeros_like(B[0])
            for j in range(n):
                acc = acc + comb(n - 1, j, exact=True) * ell[..., j] * B[n - 1 - j]
            B.append(acc)
        return base * B[k - 1] / math.factorial(k - 1)

    def f_kw_fd(self, k: int, w, p, step: float = 1e-4):
        """Central finite-difference oracle for f_kw, k <= 3."""
        if k == 1:
            return self.f_w(w, p)
        if k == 2:
            return (self.f_w(w + step, p) - self.f_w(w - step, p)) / (2 * step)
        if k == 3:
            return (self.f_w(w + step, p) - 2 * self.f_w(w, p) + self.f_w(w - step, p)) / (2 * step**2)
        raise ValueError("finite-difference oracle implemented for k <= 3")

    def f_wA(self, w, A, p):
        """sum_k f_(k+1)w(p) A^k for nilpotent A; shape p.shape + A.shape."""
        A = np.atleast_2d(np.asarray(A, dtype=complex))
        n = A.shape[0]
        if n and np.linalg.norm(np.linalg.matrix_power(A, n)) > 1e-10 * max(1.0, np.linalg.norm(A)) ** n:
            raise ValueError("A must be nilpotent")
        p = np.asarray(p, dtype=complex)
        out = np.zeros(p.shape + (n, n), dtype=complex)
        Ak = np.eye(n, dtype=complex)
        for k in range(n):
            if not np.any(Ak):
                break
            out = out + np.multiply.outer(self.f_kw(k + 1, w, p), Ak)
            Ak = Ak @ A
        return out

    def f_wA_jordan(self, w, sizes, similarity, p):
        """Block-Toeplitz in f_kw for a direct sum of nilpotent Jordan cells, conjugated."""
        p = np.asarray(p, dtype=complex)
        n = sum(sizes)
        out = np.zeros(p.shape + (n, n), dtype=complex)
        start = 0
        for size in sizes:
            vals = [self.f_kw(k + 1, w, p) for k in range(size)]
            for i in range(size):
                for j in range(i, size):
                    out[..., start + i, start + j] = vals[j - i]
            start += size
        if similarity is None:
            return out
        S = np.asarray(similarity, dtype=complex)
        return S @ out @ np.linalg.inv(S)


def f_w_moving_base(ev: ThetaEvaluator, p1: complex, p0, w: complex, p: complex):
    """f^{p1 - p0}_w(p) as an analytic function of the base point p0."""
    curve = ev.curve
    E = PrimeForm(curve, ev)
    p0 = np.asarray(p0, dtype=complex)
    be = p1 - p0 + BASE_SHIFT * curve.half_period
    return (ev.theta(w - p + be) / E(w, p) * E(p0, p) / ev.theta(p0 - p + be)
            * ev.theta(p0 - w + be) / E(p0, w) / ev.theta(be))


def residue_in_base_point(curve: EllipticCurve, p1: complex, w: complex, p: complex,
                          radius: float = 0.05, ev: ThetaEvaluator | None = None,
                          config: NumericConfig = DEFAULT) -> complex:
    """Contour residue of p0 -> f^{p1 - p0}_w(p) at p0 = w."""
    ev = ev or ThetaEvaluator(curve)
    spec = ContourSpec(complex(w), radius, config.contour_nodes)
    return complex(laurent_coefficients(lambda z: f_w_moving_base(ev, p1, z, w, p), spec, [-1],
                                        config=config)[0])


def continuity_spot_check(D0: BaseDivisor, eps: float, k: int, w: complex, p, direction: complex = 1.0,
                          move: str = "both", ev: ThetaEvaluator | None = None) -> dict:
    """Deviation of f_kw(p) when points of D0 move by eps * direction.

    ``move`` is "p1", "p0" or "both".  For k >= 2 the function does not depend
    on p1, so moving p1 alone gives zero deviation there.
    """
    if move not in ("p1", "p0", "both"):
        raise ValueError("move must be 'p1', 'p0' or 'both'")
    ev = ev or ThetaEvaluator(D0.curve)
    step = eps * direction
    p1 = D0.p1.rep + (step if move in ("p1", "both") else 0.0)
    p0 = D0.p0.rep + (step if move in ("p0", "both") else 0.0)
    base = CanonicalFunctions(D0, ev)
    moved = CanonicalFunctions(BaseDivisor(D0.curve, p1, p0), ev)
    p = np.atleast_1d(np.asarray(p, dtype=complex))
    dev = np.abs(moved.f_kw(k, w, p) - base.f_kw(k, w, p))
    return {"eps": eps, "move": move, "deviation": float(dev.max()),
            "slope": float(dev.max() / eps) if eps else 0.0}
