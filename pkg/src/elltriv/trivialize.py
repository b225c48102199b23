"""Meromorphic trivializations of flat factors of automorphy on the torus.

A flat factor is determined by the matrix V = xi(tau) (with xi(1) = I); a
trivialization is a nondegenerate meromorphic F with F(u+1) = F(u) and
F(u+tau) = V F(u).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import block_diag

from .config import DEFAULT, NumericConfig
from .errors import ConstructionError, PoleError
from .numerics import ContourSpec, laurent_coefficients
from .theta import ThetaEvaluator
from .torus import EllipticCurve, lattice_distance, reduce


def jordan_block(alpha: complex, size: int) -> np.ndarray:
    """alpha on the diagonal, 1 on the superdiagonal."""
    return alpha * np.eye(size, dtype=complex) + np.eye(size, k=1, dtype=complex)


def log_shift(alpha: complex) -> complex:
    """l_alpha = log(alpha) / (2 pi i) on the principal branch."""
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    return cmath.log(alpha) / (2j * math.pi)


@dataclass(frozen=True)
class FlatFactor:
    """xi(1) = I, xi(tau) = V = S (direct sum of J_alpha blocks) S^-1."""

    blocks: tuple
    similarity: np.ndarray | None = None

    def __post_init__(self):
        blocks = tuple((complex(a), int(n)) for a, n in self.blocks)
        for a, n in blocks:
            if a == 0:
                raise ValueError("Jordan block eigenvalue must be nonzero")
            if n < 1:
                raise ValueError("Jordan block size must be positive")
        object.__setattr__(self, "blocks", blocks)
        if self.similarity is not None:
            S = np.asarray(self.similarity, dtype=complex)
            if S.shape != (self.size, self.size):
                raise ValueError("similarity has the wrong shape")
            if np.linalg.cond(S) > 1e12:
                raise ValueError("similarity is numerically singular")
            object.__setattr__(self, "similarity", S)

    @classmethod
    def jordan(cls, alpha: complex, size: int) -> "FlatFactor":
        return cls(((alpha, size),))

    @classmethod
    def identity(cls, size: int) -> "FlatFactor":
        return cls(((1.0, 1),) * size)

    @property
    def size(self) -> int:
        return sum(n for _, n in self.blocks)

    @property
    def matrix(self) -> np.ndarray:
        J = block_diag(*[jordan_block(a, n) for a, n in self.blocks])
        if self.similarity is None:
            return J
        return self.similarity @ J @ np.linalg.inv(self.similarity)


@dataclass
class MeromorphicMatrixMap:
    """A vectorized r x r meromorphic function with declared poles.

    ``func`` maps an array of points of shape (n,) to an array (n, r, r).
    """

    func: Callable[[np.ndarray], np.ndarray]
    size: int
    curve: EllipticCurve
    poles: list = field(default_factory=list)  # (TorusPoint, max order)
    factor: object = None  # FlatFactor or an explicit matrix V

    def __call__(self, u):
        arr = np.asarray(u, dtype=complex)
        out = self.func(np.atleast_1d(arr).ravel())
        out = np.asarray(out, dtype=complex).reshape((-1, self.size, self.size))
        if arr.ndim == 0:
            return out[0]
        return out.reshape(arr.shape + (self.size, self.size))

    def scalar(self, u):
        """Entry (0, 0), for 1 x 1 maps."""
        out = self(u)
        return out[..., 0, 0]

    def pole_distance(self, u: complex) -> float:
        if not self.poles:
            return math.inf
        return min(lattice_distance(self.curve, u, complex(p)) for p, _ in self.poles)

    @property
    def V(self) -> np.ndarray | None:
        return factor_matrix(self.factor) if self.factor is not None else None


def factor_matrix(factor) -> np.ndarray:
    if isinstance(factor, FlatFactor):
        return factor.matrix
    return np.atleast_2d(np.asarray(factor, dtype=complex))


def constant_map(curve: EllipticCurve, M) -> MeromorphicMatrixMap:
    M = np.atleast_2d(np.asarray(M, dtype=complex))

    def func(u):
        return np.broadcast_to(M, (u.shape[0],) + M.shape).copy()

    return MeromorphicMatrixMap(func, M.shape[0], curve, [], FlatFactor.identity(M.shape[0]))


def _evaluator(curve: EllipticCurve, ev: ThetaEvaluator | None) -> ThetaEvaluator:
    return ev if ev is not None else ThetaEvaluator(curve)


# -- scalar and theta-block trivializations ----------------------------------

def scalar_trivialization(curve: EllipticCurve, alpha: complex,
                          ev: ThetaEvaluator | None = None) -> MeromorphicMatrixMap:
    """f_alpha(u) = theta(u - l_alpha) / theta(u); the constant 1 when alpha = 1."""
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    if alpha == 1:
        return constant_map(curve, [[1.0]])
    ev = _evaluator(curve, ev)
    shift = log_shift(alpha)

    def func(u):
        den = ev.theta(u)
        _guard(den, u, ev)
        return (ev.theta(u - shift) / den)[:, None, None]

    return MeromorphicMatrixMap(func, 1, curve, [(reduce(curve, curve.half_period), 1)],
                                FlatFactor.jordan(alpha, 1))


def _guard(den, u, ev):
    den = np.atleast_1d(den)
    scale = np.exp(np.pi * np.abs(np.atleast_1d(u).imag) ** 2 / ev.tau.imag)
    if np.any(np.abs(den) < 1e-14 * scale):
        raise PoleError("evaluation at a zero of theta")


def stirling_first_unsigned(j: int) -> list[int]:
    """Coefficients c(j, m) with x (x+1) ... (x+j-1) = sum_m c(j, m) x^m."""
    coeffs = [1]
    for k in range(j):
        nxt = [0] * (len(coeffs) + 1)
        for m, c in enumerate(coeffs):
            nxt[m + 1] += c
            nxt[m] += k * c
        coeffs = nxt
    return coeffs


def block_theta_triv(curve: EllipticCurve, alpha: complex, r: int,
                     ev: ThetaEvaluator | None = None) -> MeromorphicMatrixMap:
    """Upper-triangular Toeplitz matrix of L_j[theta](u - l_alpha) / theta(u).

    L_j = (-1)^j / (alpha^j j!) D'(D'+1)...(D'+j-1) with D' = (1/2 pi i) d/du,
    which acts on the n-th Fourier mode of theta as the rising factorial of n.
    """
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    if not 1 <= r <= 8:
        raise ValueError("block size must be in 1..8")
    ev = _evaluator(curve, ev)
    shift = log_shift(alpha)
    weights = []
    for j in range(r):
        c = stirling_first_unsigned(j)
        scale = (-1) ** j / (alpha**j * math.factorial(j))
        weights.append(scale * np.array(c, dtype=complex))

    def func(u):
        den = ev.theta(u)
        _guard(den, u, ev)
        mom = ev.moments(u - shift, r - 1)
        diag = np.stack([mom[:, : len(w)] @ w for w in weights], axis=1) / den[:, None]
        out = np.zeros((u.shape[0], r, r), dtype=complex)
        for j in range(r):
            idx = np.arange(r - j)
            out[:, idx, idx + j] = diag[:, j : j + 1]
        return out

    return MeromorphicMatrixMap(func, r, curve, [(reduce(curve, curve.half_period), r)],
                                FlatFactor.jordan(alpha, r))


def matrix_theta_map(curve: EllipticCurve, V, ev: ThetaEvaluator | None = None) -> MeromorphicMatrixMap:
    from .theta import MatrixThetaSeries

    ev = _evaluator(curve, ev)
    series = MatrixThetaSeries(ev, V)
    V = series.V
    return MeromorphicMatrixMap(series, V.shape[0], curve,
                                [(reduce(curve, curve.half_period), V.shape[0])], V)


# -- single-pole trivialization ---------------------------------------------

class LambdaFunction:
    """lambda_a(u) = -(1/2 pi i) theta'(u - a - delta) / theta(u - a - delta).

    Shifts by 1 under u -> u + tau, periodic under u -> u + 1, one simple pole
    per period cell at a with residue -1/(2 pi i).
    """

    def __init__(self, curve: EllipticCurve, a: complex = 0.0, ev: ThetaEvaluator | None = None):
        self.curve = curve
        self.a = complex(a)
        self.ev = _evaluator(curve, ev)

    def _arg(self, u):
        return np.asarray(u, dtype=complex) - self.a - self.curve.half_period

    def __call__(self, u):
        mom = self.ev.moments(self._arg(u), 1)
        out = -mom[..., 1] / mom[..., 0]
        return out if np.ndim(out) else complex(out)

    def log_theta_derivs(self, u, kmax: int):
        """Derivatives 1..kmax of log theta(u - a - delta)."""
        return self.ev.log_derivs(self._arg(u), kmax)


def pn_poly(alpha, n: int) -> list:
    """Ascending coefficients of p_n(u) = alpha^-n / n! * u (u-1) ... (u-(n-1)).

    Exact when ``alpha`` is an int or Fraction.
    """
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    exact = isinstance(alpha, (int, Fraction))
    one = Fraction(1) if exact else 1.0
    coeffs = [one]
    for k in range(n):
        nxt = [0 * one] * (len(coeffs) + 1)
        for m, c in enumerate(coeffs):
            nxt[m + 1] += c
            nxt[m] -= k * c
        coeffs = nxt
    scale = (Fraction(alpha) ** (-n) / math.factorial(n)) if exact else alpha ** (-n) / math.factorial(n)
    return [c * scale for c in coeffs]


def poly_eval(coeffs: Sequence, x):
    acc = 0 * np.asarray(x, dtype=complex)
    for c in reversed(coeffs):
        acc = acc * x + complex(c)
    return acc


def toeplitz_upper(first_row: np.ndarray) -> np.ndarray:
    """Stack of upper-triangular Toeplitz matrices from rows (n, r)."""
    n, r = first_row.shape
    out = np.zeros((n, r, r), dtype=complex)
    for j in range(r):
        idx = np.arange(r - j)
        out[:, idx, idx + j] = first_row[:, j : j + 1]
    return out


def single_pole_triv(curve: EllipticCurve, alpha: complex, r: int, a: complex = 0.0,
                     ev: ThetaEvaluator | None = None) -> MeromorphicMatrixMap:
    """G_r(u) = P_r(lambda_a(u)), Toeplitz in p_0, ..., p_{r-1}.

    Satisfies G_r(u + tau) = alpha^-1 J_alpha G_r(u).
    """
    lam = LambdaFunction(curve, a, ev)
    polys = [pn_poly(complex(alpha), k) for k in range(r)]

    def func(u):
        x = lam(u)
        row = np.stack([poly_eval(p, x) for p in polys], axis=-1).reshape(-1, r)
        return toeplitz_upper(row)

    poles = [(reduce(curve, a), r - 1)] if r > 1 else []
    return MeromorphicMatrixMap(func, r, curve, poles, jordan_block(alpha, r) / alpha)


# -- automorphy verification --------------------------------------------------

def sample_points(curve: EllipticCurve, rng: np.random.Generator, count: int,
                  avoid: Sequence[complex] = (), margin: float = DEFAULT.pole_margin,
                  max_tries: int = 100) -> np.ndarray:
    """Uniform points of the fundamental domain at lattice distance >= margin from ``avoid``."""
    pts = []
    tries = 0
    while len(pts) < count:
        tries += 1
        if tries > max_tries * count:
            raise PoleError("could not place sample points away from the declared poles")
        s, t = rng.random(2)
        u = curve.from_coords(s, t)
        if all(lattice_distance(curve, u, complex(p)) >= margin for p in avoid):
            pts.append(u)
    return np.array(pts, dtype=complex)


def verify_automorphy(F: MeromorphicMatrixMap, factor=None, samples: int = 20, seed=0,
                      config: NumericConfig = DEFAULT) -> float:
    """Max over samples of ||F(u+1)-F(u)|| and ||F(u+tau) - V F(u)|| relative to ||F(u)||."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    factor = F.factor if factor is None else factor
    V = factor_matrix(factor)
    curve = F.curve
    rng = np.random.default_rng(seed)
    u = sample_points(curve, rng, samples, [p for p, _ in F.poles], config.pole_margin)
    base = F(u)
    shifted1 = F(u + 1)
    shiftedt = F(u + curve.tau)
    norms = np.linalg.norm(base, axis=(1, 2))
    r1 = np.linalg.norm(shifted1 - base, axis=(1, 2)) / norms
    rt = np.linalg.norm(shiftedt - V @ base, axis=(1, 2)) / norms
    return float(max(r1.max(), rt.max()))


# -- principal-part functions ----------------------------------------------

class PrincipalPartFunction:
    """Scalar function with factor alpha, principal part 1/(u-center)^k at center.

    For alpha != 1 it is a combination of (theta(u - mu_k)/theta(u - delta))^k
    style quotients; for alpha = 1 it is built from Weierstrass-type functions,
    and the k = 1 member carries a compensating simple pole at ``aux``.
    """

    def __init__(self, evaluate, k: int, center: complex, poles):
        self._evaluate = evaluate
        self.k = k
        self.center = complex(center)
        self.poles = poles

    def __call__(self, u):
        u = np.asarray(u, dtype=complex)
        return self._evaluate(u - self.center)

    def shifted(self, center: complex) -> "PrincipalPartFunction":
        moved = [complex(p) - self.center + complex(center) for p in self.poles]
        return PrincipalPartFunction(self._evaluate, self.k, center, moved)


def principal_part_basis(curve: EllipticCurve, alpha: complex, kmax: int,
                         aux: complex | None = None, ev: ThetaEvaluator | None = None,
                         config: NumericConfig = DEFAULT, report: list | None = None):
    """Functions s_1..s_kmax with s(u+1) = s, s(u+tau) = alpha s, principal part 1/u^k at 0."""
    if kmax > 6:
        raise ValueError("kmax must be <= 6")
    ev = _evaluator(curve, ev)
    delta = curve.half_period
    spec = ContourSpec(0.0, config.contour_radius, config.contour_nodes)
    basis = []
    if abs(alpha - 1) < 1e-14:
        lam_logs = lambda z, n: ev.log_derivs(z - delta, n)  # noqa: E731
        if aux is None:
            aux = 0.37 + 0.41 * curve.tau
        aux = complex(aux)

        def s1(z):
            return lam_logs(z, 1)[..., 0] - lam_logs(z - aux, 1)[..., 0]

        basis.append(PrincipalPartFunction(s1, 1, 0.0, [0.0, aux]))

        def make(k):
            sign = (-1) ** k / math.factorial(k - 1)

            def raw(z):
                return -sign * lam_logs(z, k)[..., k - 1]

            return raw

        for k in range(2, kmax + 1):
            raw = make(k)
            if k == 2:
                c0 = laurent_coefficients(raw, spec, [0], config=config)[0]
                wp = (lambda raw, c0: (lambda z: raw(z) - c0))(raw, c0)
                basis.append(PrincipalPartFunction(wp, 2, 0.0, [0.0]))
            else:
                basis.append(PrincipalPartFunction(raw, k, 0.0, [0.0]))
        return basis

    shift = log_shift(alpha)
    for k in range(1, kmax + 1):
        branch = 0
        mu = (shift + branch) / k + delta
        if lattice_distance(curve, mu, delta) < 1e-6:
            if k == 1:
                raise ConstructionError("alpha is numerically 1; use the alpha = 1 family")
            branch = 1
            mu = (shift + branch) / k + delta
            if report is not None:
                report.append(f"k={k}: degenerate principal root, used branch {branch}")

        def q(z, mu=mu, k=k):
            return (ev.theta(z - mu) / ev.theta(z - delta)) ** k

        coeffs = laurent_coefficients(q, spec, [-j for j in range(1, k + 1)], config=config)
        lead = coeffs[k - 1]
        if abs(lead) < 1e-12:
            raise ConstructionError(f"vanishing leading Laurent coefficient for k={k}")
        lower = [(coeffs[j - 1], basis[j - 1]) for j in range(1, k)]

        def sk(z, q=q, lead=lead, lower=lower):
            acc = q(z)
            for c, s in lower:
                acc = acc - c * s(z)
            return acc / lead

        basis.append(PrincipalPartFunction(sk, k, 0.0, [0.0]))
    return basis


# -- inductive extension ----------------------------------------------------

@dataclass
class Extension:
    """Result of one inductive step: the new map, its simple null-pole data, diagnostics."""

    F: MeromorphicMatrixMap
    data: object
    report: dict


def _pick_points(curve, rng, count, avoid, margin):
    pts = []
    for _ in range(10000):
        u = curve.from_coords(*rng.random(2))
        if all(lattice_distance(curve, u, p) >= margin for p in list(avoid) + pts):
            pts.append(u)
            if len(pts) == count:
                return pts
    raise ConstructionError("could not place auxiliary points")


def extend_trivialization(curve: EllipticCurve, F_r: MeromorphicMatrixMap | None, alpha: complex,
                          a: complex = 0.0, data=None, seed=0, ev: ThetaEvaluator | None = None,
                          config: NumericConfig = DEFAULT) -> Extension:
    """Build F_{r+1} = [[s0, s + p S_r], [0, F_r]] trivializing xi of J_alpha of size r+1.

    ``F_r`` must trivialize the Jordan factor of size r and ``data`` must be its
    simple null-pole data.  ``F_r = None`` is the base case r = 0.
    """
    from .nullpole import SimpleNullPoleData

    ev = _evaluator(curve, ev)
    delta = curve.half_period
    a = complex(a)
    rng = np.random.default_rng(seed)
    is_one = abs(alpha - 1) < 1e-14

    if F_r is None:
        F1 = scalar_trivialization(curve, alpha, ev)
        if is_one:
            d = SimpleNullPoleData(curve, [], [])
        else:
            z = reduce(curve, delta + log_shift(alpha))
            d = SimpleNullPoleData(curve, [(z, np.ones(1))], [(reduce(curve, delta), np.ones(1))])
        return Extension(F1, d, {"rank": 1})

    r = F_r.size
    if r + 1 > 4:
        raise ValueError("the inductive extension is capped at rank 4")
    if data is None:
        raise ValueError("simple null-pole data of F_r is required")
    existing = [complex(p) for p, _ in data.zeros] + [complex(p) for p, _ in data.poles]
    margin = 0.25
    lam = LambdaFunction(curve, a, ev)
    G_r = single_pole_triv(curve, alpha, r, a, ev)
    polys = [pn_poly(complex(alpha), k) for k in range(1, r + 1)]

    def h0(u):
        u = np.atleast_1d(np.asarray(u, dtype=complex))
        S_r = np.linalg.solve(G_r(u), F_r(u))
        x = lam(u)
        p = np.stack([poly_eval(c, x) for c in polys], axis=-1).reshape(-1, 1, r)
        return (p @ S_r)[:, 0, :]

    # s0: scalar with factor alpha, fresh simple zero(s) and pole(s)
    for attempt in range(200):
        if is_one:
            pi1, pi2, zeta1 = _pick_points(curve, rng, 3, existing + [a], margin)
            zeta2 = pi1 + pi2 - zeta1
            clear = min(lattice_distance(curve, zeta2, p) for p in existing + [a, pi1, pi2, zeta1])
            zeros_new, poles_new = [zeta1, zeta2], [pi1, pi2]
        else:
            # the zero sits at pi1 + l_alpha, forced by the factor
            (pi1,) = _pick_points(curve, rng, 1, existing + [a], margin)
            zeta1 = pi1 + log_shift(alpha)
            clear = min(lattice_distance(curve, zeta1, p) for p in existing + [a])
            clear = min(clear, margin if lattice_distance(curve, zeta1, pi1) > 1e-3 else 0.0)
            zeros_new, poles_new = [zeta1], [pi1]
        if clear >= margin:
            break
    else:
        raise ConstructionError("could not place the new zeros and poles")

    def s0(u):
        u = np.asarray(u, dtype=complex)
        num = np.ones_like(u)
        for z in zeros_new:
            num = num * ev.theta(u - z + delta)
        for w in poles_new:
            num = num / ev.theta(u - w + delta)
        return num

    aux = poles_new[0]
    basis = principal_part_basis(curve, alpha, 2 * r, aux=aux - a, ev=ev, config=config)
    basis = [b.shifted(a) for b in basis]
    if is_one:
        def simple_at(c):
            def fn(u):
                u = np.asarray(u, dtype=complex)
                return (ev.log_derivs(u - c - delta, 1)[..., 0]
                        - ev.log_derivs(u - aux - delta, 1)[..., 0])
            return fn
    else:
        simple_at = basis[0].shifted

    # principal part of h0 at a
    pole_pts = [complex(p) for p, _ in data.poles]
    spec_a = ContourSpec(a, config.contour_radius, config.contour_nodes)
    coeffs_a = laurent_coefficients(h0, spec_a, [-k for k in range(1, 2 * r + 1)], config=config)
    # residues of h0 at the poles of F_r
    res_w = []
    for w in pole_pts:
        others = [p for p in existing + [a] + poles_new + zeros_new if p != w]
        rad = min(config.contour_radius, 0.4 * min(lattice_distance(curve, w, p) for p in others))
        res_w.append(laurent_coefficients(h0, ContourSpec(w, rad, config.contour_nodes), [-1],
                                          config=config)[0])
    corrections = [(coeffs_a[k - 1], basis[k - 1]) for k in range(1, 2 * r + 1)]
    corrections += [(res, simple_at(w)) for res, w in zip(res_w, pole_pts)]

    def h(u):
        u = np.atleast_1d(np.asarray(u, dtype=complex))
        acc = h0(u)
        for c, fn in corrections:
            acc = acc - np.multiply.outer(fn(u), c)
        return acc

    def func(u):
        u = np.atleast_1d(np.asarray(u, dtype=complex))
        out = np.zeros((u.shape[0], r + 1, r + 1), dtype=complex)
        out[:, 0, 0] = s0(u)
        out[:, 0, 1:] = h(u)
        out[:, 1:, 1:] = F_r(u)
        return out

    poles = [(p, 1) for p, _ in data.poles] + [(reduce(curve, w), 1) for w in poles_new]
    F = MeromorphicMatrixMap(func, r + 1, curve, poles, FlatFactor.jordan(alpha, r + 1))

    # certify the pole at a is gone
    leftover = laurent_coefficients(lambda u: h(u), spec_a, [-k for k in range(1, 2 * r + 1)],
                                    config=config)
    scale = max(1.0, float(np.max(np.abs(coeffs_a))))
    if np.max(np.abs(leftover)) > 1e-7 * scale:
        raise ConstructionError(
            f"principal part at a not removed: residual {np.max(np.abs(leftover)):.3g}")

    # new simple null-pole data
    zeros = []
    for z, x in data.zeros:
        zc = complex(z)
        hx = h(zc)[0] @ x
        lead = -hx / s0(np.array([zc]))[0]
        zeros.append((z, np.concatenate([[lead], x])))
    e1 = np.zeros(r + 1, dtype=complex)
    e1[0] = 1.0
    for z in zeros_new:
        zeros.append((reduce(curve, z), e1.copy()))
    poles_data = [(w, np.concatenate([[0.0], y])) for w, y in data.poles]
    for w in poles_new:
        others = [p for p in existing + [a] + poles_new + zeros_new if p != w]
        rad = min(config.contour_radius, 0.4 * min(lattice_distance(curve, w, p) for p in others))
        spec_w = ContourSpec(w, rad, config.contour_nodes)
        rs0 = laurent_coefficients(s0, spec_w, [-1], config=config)[0]
        rh = laurent_coefficients(h, spec_w, [-1], config=config)[0]
        poles_data.append((reduce(curve, w), np.concatenate([[1.0], rh / rs0])))
    new_data = SimpleNullPoleData(curve, zeros, poles_data)
    report = {
        "rank": r + 1,
        "new_zeros": [complex(z) for z in zeros_new],
        "new_poles": [complex(w) for w in poles_new],
        "principal_part_at_a": np.abs(coeffs_a).max().item(),
        "leftover_at_a": float(np.max(np.abs(leftover))),
    }
    return Extension(F, new_data, report)
