"""Right null-pole calculus: Sylvester data sets, singular subspaces, simple data.

Local coordinate at a point q0 of the cover is always z = u - q0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from .config import DEFAULT, NumericConfig
from .errors import ElltrivError
from .numerics import (ContourSpec, controllability_matrix, laurent_coefficients, nilpotency_index,
                       numerical_rank, observability_matrix, parallelogram_path, sample,
                       sylvester_residual, winding_along, winding_number)
from .torus import EllipticCurve, TorusPoint, lattice_distance, nearest_image, reduce


def _mat(M, shape=None):
    M = np.asarray(M, dtype=complex)
    if shape is not None and M.size == 0:
        return np.zeros(shape, dtype=complex)
    return np.atleast_2d(M)


@dataclass(frozen=True, eq=False)
class SylvesterDataSet:
    """((Bz, Az), (Api, Cpi), S): right null pair, left pole pair, coupling.

    Shapes: Bz r x nz, Az nz x nz, Api np x np, Cpi np x r, S np x nz.
    """

    r: int
    Bz: np.ndarray
    Az: np.ndarray
    Api: np.ndarray
    Cpi: np.ndarray
    S: np.ndarray

    @classmethod
    def build(cls, r: int, Bz=None, Az=None, Api=None, Cpi=None, S=None) -> "SylvesterDataSet":
        nz = 0 if Az is None else np.atleast_2d(np.asarray(Az)).shape[0]
        npi = 0 if Api is None else np.atleast_2d(np.asarray(Api)).shape[0]
        Bz = _mat(Bz if Bz is not None else np.zeros((r, 0)), (r, nz))
        Az = _mat(Az if Az is not None else np.zeros((0, 0)), (nz, nz))
        Api = _mat(Api if Api is not None else np.zeros((0, 0)), (npi, npi))
        Cpi = _mat(Cpi if Cpi is not None else np.zeros((0, r)), (npi, r))
        S = _mat(S if S is not None else np.zeros((npi, nz)), (npi, nz))
        if Bz.shape != (r, nz) or Cpi.shape != (npi, r) or S.shape != (npi, nz):
            raise ValueError(f"inconsistent shapes Bz{Bz.shape} Cpi{Cpi.shape} S{S.shape}")
        return cls(r, Bz, Az, Api, Cpi, S)

    @classmethod
    def empty(cls, r: int) -> "SylvesterDataSet":
        return cls.build(r)

    @property
    def nz(self) -> int:
        return self.Az.shape[0]

    @property
    def npi(self) -> int:
        return self.Api.shape[0]

    def same(self, other: "SylvesterDataSet") -> bool:
        return all(np.array_equal(getattr(self, k), getattr(other, k))
                   for k in ("Bz", "Az", "Api", "Cpi", "S")) and self.r == other.r


def is_admissible(T: SylvesterDataSet, tol: float = DEFAULT.sylvester_tol,
                  config: NumericConfig = DEFAULT) -> tuple[bool, list[str]]:
    """Nilpotency, controllability, observability and the Sylvester equation."""
    problems = []
    if T.npi and nilpotency_index(T.Api, config.nilpotent_tol) is None:
        problems.append("Api not nilpotent")
    if T.nz and nilpotency_index(T.Az, config.nilpotent_tol) is None:
        problems.append("Az not nilpotent")
    if T.npi and numerical_rank(controllability_matrix(T.Api, T.Cpi), config.rank_rtol) < T.npi:
        problems.append("(Api, Cpi) not controllable")
    if T.nz and numerical_rank(observability_matrix(T.Bz, T.Az), config.rank_rtol) < T.nz:
        problems.append("(Bz, Az) not observable")
    res = sylvester_residual(T.Api, T.Az, T.Cpi, T.Bz, T.S)
    if res >= tol:
        problems.append(f"Sylvester residual {res:.3g}")
    return not problems, problems


def adjoint(T: SylvesterDataSet) -> SylvesterDataSet:
    """((Cpi^T, Api^T), (Az^T, Bz^T), -S^T)."""
    return SylvesterDataSet(T.r, T.Cpi.T.copy(), T.Api.T.copy(), T.Az.T.copy(), T.Bz.T.copy(),
                            -T.S.T.copy())


def similarity(T: SylvesterDataSet, U, V) -> SylvesterDataSet:
    """((Bz U, U^-1 Az U), (V^-1 Api V, V^-1 Cpi), V^-1 S U)."""
    U = _mat(U, (T.nz, T.nz))
    V = _mat(V, (T.npi, T.npi))
    for M, name in ((U, "U"), (V, "V")):
        if M.size and np.linalg.cond(M) > 1e12:
            raise ValueError(f"{name} is singular")
    Ui = np.linalg.inv(U) if U.size else U
    Vi = np.linalg.inv(V) if V.size else V
    return SylvesterDataSet(T.r, T.Bz @ U, Ui @ T.Az @ U, Vi @ T.Api @ V, Vi @ T.Cpi, Vi @ T.S @ U)


# -- membership in the singular subspace ------------------------------------

@dataclass
class MembershipResult:
    member: bool
    x: np.ndarray
    principal_residual: float
    residue_residual: float
    diagnostic: str = ""

    def __bool__(self):
        return self.member


def _as_rows(values: np.ndarray, r: int) -> np.ndarray:
    return values.reshape(values.shape[0], r)


def membership(h, T: SylvesterDataSet, q0: complex, pole_order: int | None = None,
               radius: float | None = None, config: NumericConfig = DEFAULT) -> MembershipResult:
    """Is the row function ``h`` in the singular subspace of T at q0?

    h = x (zI - Api)^-1 Cpi + hol, with x S = res[hol Bz (zI - Az)^-1].  All
    quantities come from Laurent coefficients of h at q0; the Taylor part of
    hol coincides with the nonnegative coefficients of h.
    """
    q0 = complex(q0)
    K = pole_order if pole_order is not None else T.npi + 2
    K = max(K, T.npi, 1)
    rad = radius or config.contour_radius
    orders = list(range(-K, max(T.nz, 1)))
    spec = ContourSpec(q0, rad, config.contour_nodes)
    vals = sample(h, spec.points(2 * spec.nodes))
    vals = _as_rows(vals, T.r)
    scale = float(np.max(np.abs(vals))) or 1.0
    coeffs = laurent_coefficients(lambda z: _as_rows(sample(h, z), T.r), spec, orders,
                                  config=config)
    coef = {k: coeffs[i] for i, k in enumerate(orders)}
    # principal part: c_{-(j+1)} = x Api^j Cpi, j = 0..K-1
    target = np.concatenate([coef[-(j + 1)] for j in range(K)])
    weights = np.concatenate([np.full(T.r, rad ** (j + 1) / scale) for j in range(K)])
    if T.npi:
        blocks, cur = [], T.Cpi
        for _ in range(K):
            blocks.append(cur)
            cur = T.Api @ cur
        basis = np.hstack(blocks)
        x, *_ = np.linalg.lstsq((basis * weights).T, target * weights, rcond=None)
        x = x.reshape(T.npi)
        fitted = x @ basis
    else:
        x = np.zeros(0, dtype=complex)
        fitted = np.zeros_like(target)
    principal = float(np.max(np.abs((target - fitted) * weights)))
    # residue condition: x S = sum_j c_j Bz Az^j
    res = np.zeros(T.nz, dtype=complex)
    norm_terms = 0.0
    Ak = np.eye(T.nz, dtype=complex)
    for j in range(T.nz):
        term = T.Bz @ Ak
        res = res + coef[j] @ term
        norm_terms += scale * rad ** (-j) * max(np.linalg.norm(term, 2), 1e-300)
        Ak = Ak @ T.Az
    lhs = x @ T.S if T.nz else np.zeros(0, dtype=complex)
    denom = max(norm_terms + np.linalg.norm(x) * (np.linalg.norm(T.S, 2) if T.S.size else 0.0), 1e-300)
    residue = float(np.max(np.abs(lhs - res)) / denom) if T.nz else 0.0
    ok_p = principal < config.membership_tol
    ok_r = residue < config.membership_tol
    diag = "" if ok_p and ok_r else ("unmatched principal part" if not ok_p else "residue condition fails")
    return MembershipResult(ok_p and ok_r, x, principal, residue, diag)


def _negative_part(func, q0, rad, order, config):
    spec = ContourSpec(q0, rad, config.contour_nodes)
    vals = sample(func, spec.points(2 * spec.nodes))
    scale = float(np.max(np.abs(vals))) or 1.0
    orders = [-k for k in range(1, order + 1)]
    coeffs = laurent_coefficients(func, spec, orders, config=config)
    rel = [np.max(np.abs(c)) * rad ** k / scale for c, k in zip(coeffs, range(1, order + 1))]
    return float(max(rel))


@dataclass
class LocalInterpolationReport:
    rows_ok: bool
    zero_side: float
    pole_side: float
    winding: int
    expected_winding: int
    ok: bool
    row_results: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def verify_local_interpolation(F, T: SylvesterDataSet, q0: complex, radius: float | None = None,
                               config: NumericConfig = DEFAULT) -> LocalInterpolationReport:
    """Check that the germ of F at q0 has the local null-pole structure T."""
    q0 = complex(q0)
    rad = radius or config.contour_radius
    r = T.r

    def Fm(u):
        return sample(F, np.atleast_1d(u)).reshape(-1, r, r)

    rows = []
    for i in range(r):
        rows.append(membership(lambda u, i=i: Fm(u)[:, i, :], T, q0, T.npi + 2, rad, config))
    rows_ok = all(rows)
    order = T.npi + T.nz + 2
    Iz, Ip = np.eye(T.nz), np.eye(T.npi)

    def zero_side(u):
        u = np.atleast_1d(u)
        res = []
        for uu, Fu in zip(u, Fm(u)):
            res.append(Fu @ T.Bz @ np.linalg.inv((uu - q0) * Iz - T.Az))
        return np.array(res)

    def pole_side(u):
        u = np.atleast_1d(u)
        res = []
        for uu, Fu in zip(u, Fm(u)):
            res.append(np.linalg.inv((uu - q0) * Ip - T.Api) @ T.Cpi @ np.linalg.inv(Fu))
        return np.array(res)

    zs = _negative_part(zero_side, q0, rad, order, config) if T.nz else 0.0
    ps = _negative_part(pole_side, q0, rad, order, config) if T.npi else 0.0
    wind = winding_number(lambda u: np.linalg.det(Fm(u)), q0, rad, config=config)
    expected = T.nz - T.npi
    ok = rows_ok and zs < config.membership_tol and ps < config.membership_tol and wind == expected
    return LocalInterpolationReport(rows_ok, zs, ps, wind, expected, ok, rows)


# -- simple null-pole data --------------------------------------------------

@dataclass
class SimpleNullPoleData:
    """Zeros (z_i, x_i) and poles (w_i, y_i) with equal counts and distinct points."""

    curve: EllipticCurve
    zeros: list
    poles: list

    def __post_init__(self):
        self.zeros = [(_point(self.curve, z), np.asarray(x, dtype=complex)) for z, x in self.zeros]
        self.poles = [(_point(self.curve, w), np.asarray(y, dtype=complex)) for w, y in self.poles]
        if len(self.zeros) != len(self.poles):
            raise ValueError("simple null-pole data needs equal numbers of zeros and poles")
        pts = [p for p, _ in self.zeros] + [p for p, _ in self.poles]
        for i, p in enumerate(pts):
            for q in pts[i + 1:]:
                if p.same_as(q):
                    raise ValueError("null-pole points must be distinct")
        for _, v in self.zeros + self.poles:
            if not np.any(v):
                raise ValueError("null and pole vectors must be nonzero")

    @property
    def N(self) -> int:
        return len(self.zeros)

    @property
    def r(self) -> int:
        vecs = self.zeros + self.poles
        return vecs[0][1].shape[0] if vecs else 0


def _point(curve, z) -> TorusPoint:
    return z if isinstance(z, TorusPoint) else reduce(curve, complex(z))


def simple_to_divisor_entries(d: SimpleNullPoleData) -> list:
    """Zero points get null pair (x, [0]); pole points get pole pair ([0], y^T)."""
    out = []
    for z, x in d.zeros:
        out.append((z, SylvesterDataSet.build(x.shape[0], Bz=x.reshape(-1, 1), Az=np.zeros((1, 1)))))
    for w, y in d.poles:
        out.append((w, SylvesterDataSet.build(y.shape[0], Api=np.zeros((1, 1)), Cpi=y.reshape(1, -1))))
    return out


@dataclass
class SimpleStructureReport:
    ok: bool
    checks: dict

    def __bool__(self):
        return self.ok


def _best_corner(curve, points):
    """Corner of a period parallelogram whose boundary stays far from ``points``."""
    best, best_c = -1.0, 0.0
    for ds in np.linspace(0, 1, 21)[:-1]:
        for dt in np.linspace(0, 1, 21)[:-1]:
            corner = curve.from_coords(ds, dt)
            path = parallelogram_path(corner, curve.tau)
            edge = path(np.linspace(0, 1, 401))
            dist = min((min(lattice_distance(curve, e, p) for e in edge[::4]) for p in points),
                       default=1.0)
            if dist > best:
                best, best_c = dist, corner
    return best_c, best


def _local_radius(curve, center, points, cap):
    others = [p for p in points if lattice_distance(curve, p, center) > 1e-9]
    if not others:
        return cap
    return min(cap, 0.4 * min(lattice_distance(curve, center, p) for p in others))


def _boundary_moments(G, path, nmoments, nodes=64):
    """Max relative size of \\oint G(u) u^k du, k < nmoments, along the parallelogram."""
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    acc = None
    scale = 0.0
    for seg in range(4):
        t0, t1 = seg / 4, (seg + 1) / 4
        tt = 0.5 * (t1 - t0) * xg + 0.5 * (t1 + t0)
        z = path(tt)
        dz = (path(np.array([t1]))[0] - path(np.array([t0]))[0])
        vals = G(z)
        scale = max(scale, float(np.max(np.abs(vals))))
        mom = np.stack([np.tensordot(0.5 * wg * z**k, vals, axes=(0, 0)) * dz
                        for k in range(nmoments)])
        acc = mom if acc is None else acc + mom
    return float(np.max(np.abs(acc))) / max(scale, 1e-300)


def check_simple_structure(F, d: SimpleNullPoleData, config: NumericConfig = DEFAULT,
                           ev=None) -> SimpleStructureReport:
    """Verify that F interpolates the simple null-pole data d.

    (1) divisor of det F: boundary winding, local windings, and the zero count
        of the entire function det(F(u) prod theta(u - w_i + delta));
    (2) only simple poles, at the w_i: vanishing order -2 coefficients and
        Cauchy moments of F(u) prod theta(u - w_i + delta) over the boundary;
    (3) F(z_i) x_i = 0 with one-dimensional right kernel;
    (4) rank-one residue at w_i with row space y_i^T, and y_i^T F^-1(w_i) = 0.
    Consequence checked as well: F^-1 has a rank-one residue at z_i with
    column space x_i.
    """
    from .theta import ThetaEvaluator

    curve = F.curve
    ev = ev or ThetaEvaluator(curve)
    r = F.size
    delta = curve.half_period
    zeros = [(complex(z), x) for z, x in d.zeros]
    poles = [(complex(w), y) for w, y in d.poles]
    pts = [z for z, _ in zeros] + [w for w, _ in poles]
    checks: dict = {}
    tol = config.membership_tol
    gap = config.kernel_gap

    probe = curve.from_coords(0.123, 0.377)
    while pts and min(lattice_distance(curve, probe, p) for p in pts) < 0.05:
        probe += 0.071 + 0.013j
    if abs(np.linalg.det(F(probe))) == 0:
        raise ElltrivError("det F vanishes at the probe point; F looks degenerate")

    def detF(u):
        return np.linalg.det(F(np.atleast_1d(u)))

    corner, clearance = _best_corner(curve, pts)
    path = parallelogram_path(corner, curve.tau)
    checks["boundary_clearance"] = clearance
    boundary = winding_along(detF, path, config=config)
    checks["boundary_winding"] = boundary

    local = []
    for z, _ in zeros:
        local.append(("zero", winding_number(detF, z, _local_radius(curve, z, pts, 0.1), config=config)))
    for w, _ in poles:
        local.append(("pole", winding_number(detF, w, _local_radius(curve, w, pts, 0.1), config=config)))
    checks["local_windings"] = [n for _, n in local]
    ok1 = boundary == 0 and all((n == 1) if kind == "zero" else (n == -1) for kind, n in local)

    # entire part: F(u) prod theta(u - w + delta), with w the images inside the cell
    cell = lambda p: nearest_image(curve, corner + 0.5 + 0.5 * curve.tau, p)  # noqa: E731
    wimg = [cell(w) for w, _ in poles]

    def Gent(u):
        u = np.atleast_1d(u)
        fac = np.ones(u.shape, dtype=complex)
        for w in wimg:
            fac = fac * ev.theta(u - w + delta)
        return F(u) * fac[:, None, None]

    moments = _boundary_moments(Gent, path, 4)
    checks["entire_part_moment"] = moments
    count = winding_along(lambda u: np.linalg.det(Gent(u)), path, config=config)
    checks["entire_det_zero_count"] = count
    expected_count = len(zeros) + (r - 1) * len(poles)
    checks["expected_zero_count"] = expected_count
    order2 = []
    for w, _ in poles:
        rad = _local_radius(curve, w, pts, 0.1)
        spec = ContourSpec(w, rad, config.contour_nodes)
        c = laurent_coefficients(F, spec, [-2, -1], config=config)
        scale = float(np.max(np.abs(sample(F, spec.points()))))
        order2.append(float(np.max(np.abs(c[0]))) * rad**2 / scale)
    checks["order_minus_two"] = order2
    ok2 = moments < 1e-8 and count == expected_count and all(v < tol for v in order2)

    def circle_scale(func, center):
        rad = _local_radius(curve, center, pts, 0.1)
        spec = ContourSpec(center, rad, config.contour_nodes)
        vals = sample(func, spec.points())
        return spec, rad, float(np.max(np.linalg.norm(vals, axis=(1, 2))))

    def Finv(u):
        return np.linalg.inv(F(np.atleast_1d(u)))

    # (3) null vectors, scaled by the size of F near z
    null_res, kernel_dims = [], []
    for z, x in zeros:
        _, _, scale = circle_scale(F, z)
        Fz = F(z)
        sv = np.linalg.svd(Fz, compute_uv=False)
        null_res.append(float(np.linalg.norm(Fz @ x) / (scale * np.linalg.norm(x))))
        kernel_dims.append(int(np.sum(sv < gap * scale)))
    checks["null_residuals"] = null_res
    checks["kernel_dims"] = kernel_dims
    ok3 = all(v < tol for v in null_res) and all(k == 1 for k in kernel_dims)

    # (4) residues at the poles
    res_rank, row_space, left_kernel = [], [], []
    for w, y in poles:
        spec, rad, _ = circle_scale(F, w)
        R = laurent_coefficients(F, spec, [-1], config=config)[0]
        sv = np.linalg.svd(R, compute_uv=False)
        res_rank.append(int(np.sum(sv > gap * sv[0])) if sv[0] > 0 else 0)
        Q = null_space(y.reshape(1, -1))
        row_space.append(float(np.linalg.norm(R @ Q) / max(np.linalg.norm(R), 1e-300)) if Q.size else 0.0)
        _, _, inv_scale = circle_scale(Finv, w)
        cinv = laurent_coefficients(Finv, spec, [-1, 0], config=config)
        left_kernel.append(max(float(np.linalg.norm(y @ cinv[1]) / (np.linalg.norm(y) * inv_scale)),
                               float(np.linalg.norm(cinv[0])) * rad / inv_scale))
    checks["residue_ranks"] = res_rank
    checks["residue_row_space"] = row_space
    checks["left_kernel_inverse"] = left_kernel
    ok4 = all(k == 1 for k in res_rank) and all(v < tol for v in row_space) and all(
        v < tol for v in left_kernel)

    # consequence at zeros: residue of F^-1 has column space x
    inv_cols = []
    for z, x in zeros:
        rad = _local_radius(curve, z, pts, 0.1)
        spec = ContourSpec(z, rad, config.contour_nodes)
        R = laurent_coefficients(Finv, spec, [-1], config=config)[0]
        Q = null_space(x.reshape(1, -1).conj())
        inv_cols.append(float(np.linalg.norm(Q.conj().T @ R) / max(np.linalg.norm(R), 1e-300))
                        if Q.size else 0.0)
    checks["inverse_residue_columns"] = inv_cols
    ok_c = all(v < tol for v in inv_cols)

    checks.update({"divisor": ok1, "simple_poles": ok2, "null_vectors": ok3, "pole_vectors": ok4,
                   "consequences": ok_c})
    return SimpleStructureReport(ok1 and ok2 and ok3 and ok4 and ok_c, checks)
