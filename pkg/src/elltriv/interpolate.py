"""The coupling matrix Gamma of a degree-zero matrix divisor and the interpolation solvers.

Rows of Gamma are indexed by support points carrying poles (types I and II),
columns by support points carrying zeros (types II and III).  For a row point
u_i and a column point u_j,

    Gamma_ij = -res_{u_j} [ f_{u_i,Api_i}(u) Cpi_i Bz_j (z_j I - Az_j)^-1 ]
             = -sum_k T_k Cpi_i Bz_j Az_j^k,

with T_k the Taylor coefficients of f_{u_i,Api_i} at u_j.  On the diagonal
(i = j, type II) the regular part of f replaces f and S_j is added.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .config import DEFAULT, NumericConfig
from .divisors import BaseDivisor, MatrixDivisor, degree, is_cd_admissible, partition
from .errors import ContourError, IndeterminateError
from .kernels_g1 import CanonicalFunctions
from .nullpole import membership
from .numerics import ContourSpec, laurent_coefficients
from .theta import ThetaEvaluator
from .torus import EllipticCurve, lattice_distance, reduce
from .trivialize import FlatFactor, MeromorphicMatrixMap, verify_automorphy


def _clearance(curve: EllipticCurve, center: complex, others) -> float:
    d = [lattice_distance(curve, center, complex(o)) for o in others]
    d = [x for x in d if x > 1e-12]
    return min(d) if d else np.inf


def _contour(f, center, radius, orders, config, shrink=3):
    """Laurent coefficients, halving the radius after a failed doubling check."""
    for attempt in range(shrink + 1):
        try:
            return laurent_coefficients(f, ContourSpec(complex(center), radius, config.contour_nodes),
                                        orders, config=config)
        except ContourError:
            if attempt == shrink:
                raise
            radius *= 0.5


@dataclass(eq=False)
class GammaSystem:
    """Gamma together with R, Bz, Cpi and the evaluators behind them."""

    divisor: MatrixDivisor
    base: BaseDivisor
    funcs: CanonicalFunctions
    gamma: np.ndarray
    R: np.ndarray
    Bz_row: np.ndarray
    Cpi_col: np.ndarray
    rows: list  # [(point rep, triple)] for I and II
    cols: list  # [(point rep, triple)] for II and III
    row_offsets: list
    col_offsets: list
    radii: dict = field(default_factory=dict)

    @property
    def curve(self) -> EllipticCurve:
        return self.divisor.curve

    @property
    def r(self) -> int:
        return self.divisor.r

    def block(self, i: int, j: int) -> np.ndarray:
        r0, r1 = self.row_offsets[i], self.row_offsets[i + 1]
        c0, c1 = self.col_offsets[j], self.col_offsets[j + 1]
        return self.gamma[r0:r1, c0:c1]

    def diag_eval(self, u) -> np.ndarray:
        """Block diagonal F_Api(u) = diag_i f_{u_i,Api_i}(u); shape u.shape + (nP, nP)."""
        u = np.asarray(u, dtype=complex)
        n = self.gamma.shape[0]
        out = np.zeros(u.shape + (n, n), dtype=complex)
        for i, (w, T) in enumerate(self.rows):
            a, b = self.row_offsets[i], self.row_offsets[i + 1]
            out[..., a:b, a:b] = self.funcs.f_wA(w, T.Api, u)
        return out

    def singular_values(self) -> np.ndarray:
        if self.gamma.size == 0:
            return np.zeros(0)
        return np.linalg.svd(self.gamma, compute_uv=False)

    def scale(self) -> float:
        """Reference size for Gamma: its norm or ||Cpi|| ||Bz||, whichever is larger.

        The kernels behind Gamma have unit residues, so ||Cpi|| ||Bz|| is the
        size of an unremarkable Gamma; a 1 x 1 Gamma is otherwise scale-free.
        """
        sv = self.singular_values()
        ref = np.linalg.norm(self.Cpi_col, 2) * np.linalg.norm(self.Bz_row, 2) if self.gamma.size else 0.0
        return float(max(sv[0] if sv.size else 0.0, ref))

    def invertibility(self, config: NumericConfig = DEFAULT) -> tuple[str, float]:
        """('invertible' | 'singular' | 'indeterminate', condition number).

        The condition number is measured against :meth:`scale`.  singular:
        cond >= gamma_cond_max; invertible: smallest singular value above
        gamma_sv_rtol * scale; anything in between is indeterminate.
        """
        sv = self.singular_values()
        if sv.size == 0:
            return "invertible", 1.0
        scale = self.scale()
        cond = float(scale / sv[-1]) if sv[-1] > 0 else np.inf
        if cond >= config.gamma_cond_max:
            return "singular", cond
        if sv[-1] > config.gamma_sv_rtol * scale:
            return "invertible", cond
        return "indeterminate", cond


# -- assembly -----------------------------------------------------------------

def _taylor_blocks(funcs, w, A, center, n, radius, same, config):
    """Taylor coefficients T_0..T_{n-1} of f_{w,A} (its regular part if ``same``) at center."""
    if n == 1 and not same:
        return [funcs.f_wA(w, A, np.array([center]))[0]]
    coeffs = _contour(lambda p: funcs.f_wA(w, A, p), center, radius, range(n), config)
    return list(coeffs)


def _row_residue_radius(curve, center, pts, config):
    return min(config.contour_radius, 0.4 * _clearance(curve, center, pts))


def build_gamma(D: MatrixDivisor, D0: BaseDivisor, ev: ThetaEvaluator | None = None,
                config: NumericConfig = DEFAULT) -> GammaSystem:
    """Assemble Gamma, the residues R at p1 and the stacked Bz / Cpi."""
    if degree(D) != 0:
        raise ValueError(f"divisor has degree {degree(D)}, expected 0")
    if not is_cd_admissible(D0, D, config.lattice_tol):
        raise ValueError("base divisor meets the support of the matrix divisor")
    curve = D.curve
    funcs = CanonicalFunctions(D0, ev, config)
    part = partition(D)
    entries = [(p.rep, T) for p, T in D.entries]
    rows = [entries[k] for k in part.I + part.II]
    cols = [entries[k] for k in part.II + part.III]
    row_ids = part.I + part.II
    col_ids = part.II + part.III
    row_off = list(np.cumsum([0] + [T.npi for _, T in rows]))
    col_off = list(np.cumsum([0] + [T.nz for _, T in cols]))
    r = D.r
    singular_pts = [p for p, _ in entries] + [funcs.p0, funcs.p1]
    radii = {}
    gamma = np.zeros((row_off[-1], col_off[-1]), dtype=complex)
    for jj, (uj, Tj) in enumerate(cols):
        rad = _row_residue_radius(curve, uj, singular_pts, config)
        radii[col_ids[jj]] = rad
        powers = [np.linalg.matrix_power(Tj.Az, k) for k in range(Tj.nz)]
        for ii, (ui, Ti) in enumerate(rows):
            same = row_ids[ii] == col_ids[jj]
            Ts = _taylor_blocks(funcs, ui, Ti.Api, uj, Tj.nz, rad, same, config)
            blk = -sum(Tk @ Ti.Cpi @ Tj.Bz @ Pk for Tk, Pk in zip(Ts, powers))
            if same:
                blk = blk + Ti.S
            gamma[row_off[ii]:row_off[ii + 1], col_off[jj]:col_off[jj + 1]] = blk
    # residues at p1
    rad1 = _row_residue_radius(curve, funcs.p1, singular_pts, config)
    R = np.zeros((row_off[-1], r), dtype=complex)
    for ii, (ui, Ti) in enumerate(rows):
        res = _contour(lambda p, ui=ui, Ti=Ti: funcs.f_wA(ui, Ti.Api, p) @ Ti.Cpi,
                       funcs.p1, rad1, [-1], config)[0]
        R[row_off[ii]:row_off[ii + 1]] = res
    Bz = np.hstack([T.Bz for _, T in cols]) if cols else np.zeros((r, 0), dtype=complex)
    Cpi = np.vstack([T.Cpi for _, T in rows]) if rows else np.zeros((0, r), dtype=complex)
    return GammaSystem(D, D0, funcs, gamma, R, Bz, Cpi, rows, cols, row_off, col_off, radii)


def gamma_block_oracle(system: GammaSystem, i: int, j: int, radius_factor: float = 0.6,
                       nodes: int = 256, config: NumericConfig = DEFAULT) -> np.ndarray:
    """Block (i, j) by contour integration of the full product, resolvents inverted pointwise."""
    ui, Ti = system.rows[i]
    uj, Tj = system.cols[j]
    part = partition(system.divisor)
    same = (part.I + part.II)[i] == (part.II + part.III)[j]
    pts = [p.rep for p in system.divisor.support] + [system.funcs.p0, system.funcs.p1]
    rad = radius_factor * _row_residue_radius(system.curve, uj, pts, config)
    eye_z = np.eye(Tj.nz, dtype=complex)
    eye_p = np.eye(Ti.npi, dtype=complex)

    def integrand(p):
        p = np.atleast_1d(p)
        f = system.funcs.f_wA(ui, Ti.Api, p)
        if same:
            f = f - np.linalg.inv((p - uj)[:, None, None] * eye_p - Ti.Api)
        res_z = np.linalg.inv((p - uj)[:, None, None] * eye_z - Tj.Az)
        return f @ Ti.Cpi @ Tj.Bz @ res_z

    spec = ContourSpec(complex(uj), rad, nodes)
    val = -laurent_coefficients(integrand, spec, [-1], config=config)[0]
    return val + Ti.S if same else val


# -- membership, sections, K --------------------------------------------------

def row_test_residual(system: GammaSystem, u0, u) -> float:
    """Relative residual of u0 Bz = u Gamma."""
    u0 = np.asarray(u0, dtype=complex).reshape(-1)
    u = np.asarray(u, dtype=complex).reshape(-1)
    lhs = u0 @ system.Bz_row
    rhs = u @ system.gamma if system.gamma.size else np.zeros_like(lhs)
    scale = (np.linalg.norm(u0) * np.linalg.norm(system.Bz_row, 2) if system.Bz_row.size else 0.0)
    scale += np.linalg.norm(u) * (np.linalg.norm(system.gamma, 2) if system.gamma.size else 0.0)
    if lhs.size == 0:
        return 0.0
    return float(np.linalg.norm(lhs - rhs) / max(scale, 1e-300)) if scale else float(np.linalg.norm(lhs - rhs))


def membership_row_test(system: GammaSystem, u0, u, tol: float = 1e-9) -> bool:
    return row_test_residual(system, u0, u) < tol


def assemble_row(system: GammaSystem, u0, u):
    """k(p) = u0 + u F_Api(p) Cpi as a vectorized row function."""
    u0 = np.asarray(u0, dtype=complex).reshape(-1)
    u = np.asarray(u, dtype=complex).reshape(-1)

    def k(p):
        p = np.asarray(p, dtype=complex)
        if u.size == 0:
            return np.broadcast_to(u0, p.shape + u0.shape).copy()
        return u0 + (u @ system.diag_eval(p)) @ system.Cpi_col

    return k


def pointwise_membership(system: GammaSystem, row, config: NumericConfig = DEFAULT) -> list:
    """Nullpole membership of a row function at every support point."""
    out = []
    for p, T in system.divisor.entries:
        pts = [q.rep for q in system.divisor.support if not q.same_as(p)]
        pts += [system.funcs.p0, system.funcs.p1]
        rad = min(config.contour_radius, 0.4 * _clearance(system.curve, p.rep, pts))
        out.append(membership(row, T, p.rep, radius=rad, config=config))
    return out


def section_count(system: GammaSystem, config: NumericConfig = DEFAULT) -> int:
    """Dimension of the left kernel of Gamma.

    Uses the same zones as :meth:`GammaSystem.invertibility`: a singular value
    is zero when scale / sv >= gamma_cond_max, nonzero above
    gamma_sv_rtol * scale, and ambiguous in between.
    """
    sv = system.singular_values()
    if sv.size == 0:
        return 0
    scale = system.scale()
    if scale == 0:
        return sv.size
    rel = sv / scale
    zero = rel <= 1.0 / config.gamma_cond_max
    ambiguous = ~zero & (rel <= config.gamma_sv_rtol)
    if np.any(ambiguous):
        raise IndeterminateError(f"no clear singular-value gap (min ratio {rel.min():.3g})")
    return int(np.sum(zero))


def left_kernel(system: GammaSystem) -> np.ndarray:
    """Orthonormal rows spanning the left kernel of Gamma."""
    n = section_count(system)
    if n == 0:
        return np.zeros((0, system.gamma.shape[0]), dtype=complex)
    U, _, _ = np.linalg.svd(system.gamma)
    return U[:, -n:].conj().T


def build_K(system: GammaSystem, U, U0) -> MeromorphicMatrixMap:
    """K = U0 + U F_Api Cpi."""
    r = system.r
    U0 = np.atleast_2d(np.asarray(U0, dtype=complex))
    U = np.asarray(U, dtype=complex).reshape(r, -1)

    def func(p):
        if U.shape[1] == 0:
            return np.broadcast_to(U0, (p.shape[0], r, r)).copy()
        return U0 + U @ system.diag_eval(p) @ system.Cpi_col

    poles = [(p, T.npi) for p, T in system.divisor.entries if T.npi]
    poles.append((reduce(system.curve, system.funcs.p1), 1))
    return MeromorphicMatrixMap(func, r, system.curve, poles, FlatFactor.identity(r))


# -- First Interpolation Problem ------------------------------------------------

@dataclass
class NoSolution:
    reason: str
    condition: float
    side_abs: float | None = None
    side_rel: float | None = None

    def __bool__(self):
        return False

    def to_dict(self) -> dict:
        return {"verdict": "NoSolution", "reason": self.reason, "condition": self.condition,
                "side_abs": self.side_abs, "side_rel": self.side_rel}


@dataclass
class FirstSolution:
    K: MeromorphicMatrixMap
    U: np.ndarray
    U0: np.ndarray
    system: GammaSystem
    condition: float
    side_abs: float
    side_rel: float
    certificate: dict

    def __bool__(self):
        return True

    def to_dict(self) -> dict:
        return {"verdict": "Solution", "condition": self.condition, "side_abs": self.side_abs,
                "side_rel": self.side_rel, "certificate": self.certificate}


def side_constraint(system: GammaSystem) -> tuple[float, float]:
    """(||Bz Gamma^-1 R||, same relative to ||Bz|| ||Gamma^-1|| ||R||)."""
    if system.gamma.size == 0:
        return 0.0, 0.0
    lu = scipy.linalg.lu_factor(system.gamma)
    X = scipy.linalg.lu_solve(lu, system.R)
    val = system.Bz_row @ X
    absval = float(np.linalg.norm(val, 2))
    ginv = np.linalg.norm(np.linalg.inv(system.gamma), 2)
    denom = np.linalg.norm(system.Bz_row, 2) * ginv * np.linalg.norm(system.R, 2)
    return absval, (float(absval / denom) if denom > 0 else 0.0)


def certify_solution(system: GammaSystem, K: MeromorphicMatrixMap, U0, samples: int = 12,
                     seed: int = 0, config: NumericConfig = DEFAULT) -> dict:
    """Double periodicity, pointwise interpolation, no pole at p1 and K(p0) = U0."""
    cert = {}
    cert["periodicity"] = verify_automorphy(K, FlatFactor.identity(K.size), samples, seed, config)
    rows_ok = True
    worst = 0.0
    for row in range(K.size):
        fn = (lambda p, row=row: K(np.atleast_1d(p))[:, row, :])
        for res in pointwise_membership(system, fn, config):
            rows_ok &= bool(res)
            worst = max(worst, res.principal_residual, res.residue_residual)
    cert["interpolates"] = rows_ok
    cert["membership_residual"] = worst
    p1 = system.funcs.p1
    pts = [q.rep for q in system.divisor.support] + [system.funcs.p0]
    rad = min(config.contour_radius, 0.4 * _clearance(system.curve, p1, pts))
    spec = ContourSpec(complex(p1), rad, config.contour_nodes)
    vals = K(spec.points(2 * spec.nodes))
    scale = float(np.max(np.abs(vals))) or 1.0
    neg = laurent_coefficients(lambda p: K(p), spec, [-1], config=config)[0]
    cert["pole_at_p1"] = float(np.max(np.abs(neg)) / (scale * rad))
    cert["value_at_p0"] = float(np.max(np.abs(K(system.funcs.p0) - U0)))
    cert["ok"] = bool(rows_ok and cert["periodicity"] < config.automorphy_tol
                      and cert["pole_at_p1"] < config.membership_tol
                      and cert["value_at_p0"] < config.membership_tol * max(1.0, np.abs(U0).max()))
    return cert


def solve_first(D: MatrixDivisor, D0: BaseDivisor, U0=None, ev: ThetaEvaluator | None = None,
                config: NumericConfig = DEFAULT, certify: bool = True, seed: int = 0):
    """K = U0 (I + Bz Gamma^-1 F_Api Cpi) when Gamma is invertible and the side constraint holds.

    Returns :class:`FirstSolution` or :class:`NoSolution`; raises
    :class:`IndeterminateError` when Gamma is numerically borderline.
    """
    system = build_gamma(D, D0, ev, config)
    r = D.r
    U0 = np.eye(r, dtype=complex) if U0 is None else np.atleast_2d(np.asarray(U0, dtype=complex))
    if np.linalg.cond(U0) > 1e12:
        raise ValueError("U0 must be invertible")
    verdict, cond = system.invertibility(config)
    if verdict == "singular":
        return NoSolution("singular gamma", cond)
    if verdict == "indeterminate":
        raise IndeterminateError(f"Gamma condition number {cond:.3g} is borderline")
    side_abs, side_rel = side_constraint(system)
    if side_rel >= config.side_rtol:
        return NoSolution("side constraint violated", cond, side_abs, side_rel)
    if system.gamma.size:
        lu = scipy.linalg.lu_factor(system.gamma)
        U = U0 @ scipy.linalg.lu_solve(lu, system.Bz_row.T, trans=1).T
    else:
        U = np.zeros((r, 0), dtype=complex)
    K = build_K(system, U, U0)
    cert = certify_solution(system, K, U0, seed=seed, config=config) if certify else {}
    return FirstSolution(K, U, U0, system, cond, side_abs, side_rel, cert)


# -- Second Interpolation Problem: existence of a good base divisor -----------

@dataclass
class SecondCertificate:
    found: bool
    base: BaseDivisor | None
    condition: float | None
    trials_used: int
    note: str

    def __bool__(self):
        return self.found

    def to_dict(self) -> dict:
        out = {"found": self.found, "condition": self.condition, "trials_used": self.trials_used,
               "note": self.note}
        if self.base is not None:
            out["p1"] = [self.base.p1.rep.real, self.base.p1.rep.imag]
            out["p0"] = [self.base.p0.rep.real, self.base.p0.rep.imag]
        return out


def _coord_gap(curve, u, v) -> float:
    d = np.abs(np.asarray(curve.coords(u)) - np.asarray(curve.coords(v)))
    d = np.minimum(d, 1.0 - d)
    return float(np.max(d))


def random_base_divisor(D: MatrixDivisor, rng: np.random.Generator,
                        config: NumericConfig = DEFAULT, max_tries: int = 1000) -> BaseDivisor:
    """Uniform p1, p0 with coordinate margin from the support and from each other."""
    curve = D.curve
    pts = [p.rep for p in D.support]
    chosen = []
    for _ in range(max_tries):
        u = curve.from_coords(*rng.random(2))
        if all(_coord_gap(curve, u, q) >= config.d0_margin for q in pts + chosen):
            chosen.append(u)
            if len(chosen) == 2:
                return BaseDivisor(curve, chosen[0], chosen[1])
    raise ValueError("could not place an admissible base divisor")


def solve_second_existence(D: MatrixDivisor, trials: int = 20, seed: int = 0,
                           ev: ThetaEvaluator | None = None,
                           config: NumericConfig = DEFAULT) -> SecondCertificate:
    """Search for an admissible base divisor with invertible Gamma."""
    if degree(D) != 0:
        raise ValueError(f"divisor has degree {degree(D)}, expected 0")
    rng = np.random.default_rng(seed)
    if len(D) == 0:
        return SecondCertificate(True, random_base_divisor(D, rng, config), 1.0, 0,
                                 "empty divisor: Gamma is 0 x 0")
    ev = ev or ThetaEvaluator(D.curve)
    for t in range(1, trials + 1):
        D0 = random_base_divisor(D, rng, config)
        try:
            system = build_gamma(D, D0, ev, config)
        except ContourError:
            continue
        verdict, cond = system.invertibility(config)
        if verdict == "invertible":
            return SecondCertificate(True, D0, cond, t, "invertible Gamma found")
    return SecondCertificate(False, None, None, trials,
                             "no invertible Gamma in the sampled base divisors; evidence, not proof")
