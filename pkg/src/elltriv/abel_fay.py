"""Scalar simple-multiplicity interpolation at genus one: Abel condition, Fay
determinant, closed-form Gamma inverse and the prime-form identities.

Zeros are lambda_1..lambda_N and poles mu_1..mu_N; Gamma has rows indexed by
poles and columns by zeros, Gamma_ij = -f_{mu_i}(lambda_j).
"""
from __future__ import annotations

import numpy as np

from .config import DEFAULT, NumericConfig
from .divisors import BaseDivisor, MatrixDivisor
from .interpolate import build_gamma
from .kernels_g1 import CanonicalFunctions, FlatLineBundle, PrimeForm, cauchy_kernel, f_w_moving_base
from .nullpole import SylvesterDataSet
from .numerics import ContourSpec, laurent_coefficients
from .theta import ThetaEvaluator
from .torus import EllipticCurve, lattice_distance, reduce


def scalar_divisor(curve: EllipticCurve, lambdas, mus) -> MatrixDivisor:
    """Rank-one divisor with simple zeros (Bz = 1) at lambdas and simple poles (Cpi = 1) at mus."""
    zero = SylvesterDataSet.build(1, Bz=[[1.0]], Az=[[0.0]])
    pole = SylvesterDataSet.build(1, Api=[[0.0]], Cpi=[[1.0]])
    return MatrixDivisor(curve, 1, [(l, zero) for l in lambdas] + [(m, pole) for m in mus])


def reps(curve: EllipticCurve, points) -> np.ndarray:
    return np.array([reduce(curve, complex(p)).rep for p in points], dtype=complex)


def abel_offset(curve: EllipticCurve, lambdas, mus) -> tuple[float, float]:
    """Lattice coordinates (m, n) of sum(mu) - sum(lambda) on reduced representatives."""
    d = complex(np.sum(reps(curve, mus)) - np.sum(reps(curve, lambdas)))
    n = d.imag / curve.tau.imag
    m = d.real - n * curve.tau.real
    return m, n


def satisfies_abel(curve: EllipticCurve, lambdas, mus, tol: float = 1e-9) -> bool:
    m, n = abel_offset(curve, lambdas, mus)
    return abs(m - round(m)) < tol and abs(n - round(n)) < tol


def abel_normalize(curve: EllipticCurve, lambdas, mus, tol: float = 1e-9):
    """Representatives with sum(lambda) = sum(mu) exactly, each zero moved by at most one period."""
    if not satisfies_abel(curve, lambdas, mus, tol):
        raise ValueError("points do not satisfy the Abel condition")
    lam = reps(curve, lambdas)
    mu = reps(curve, mus)
    m, n = (int(round(x)) for x in abel_offset(curve, lambdas, mus))
    for k in range(abs(n)):
        lam[k % lam.size] += np.sign(n) * curve.tau
    lam[0] += m
    lam[0] += np.sum(mu) - np.sum(lam)  # clear rounding residue
    return lam, mu


def abel_completion(curve: EllipticCurve, lambdas, mus_partial) -> complex:
    """The last pole forced by the Abel condition."""
    return reduce(curve, complex(np.sum(lambdas) - np.sum(mus_partial))).rep


# -- Fay determinant ------------------------------------------------------------

def fay_matrix(ev: ThetaEvaluator, lambdas, mus, be: complex) -> np.ndarray:
    """M_ij = theta(mu_i - lambda_j + be) / E(mu_i, lambda_j)."""
    E = PrimeForm(ev.curve, ev)
    lam = np.asarray(lambdas, dtype=complex)
    mu = np.asarray(mus, dtype=complex)
    diff = mu[:, None] - lam[None, :]
    return ev.theta(diff + be) / E(mu[:, None], lam[None, :])


def fay_rhs(ev: ThetaEvaluator, lambdas, mus, be: complex) -> complex:
    E = PrimeForm(ev.curve, ev)
    lam = np.asarray(lambdas, dtype=complex)
    mu = np.asarray(mus, dtype=complex)
    N = lam.size
    val = ev.theta(np.sum(mu) - np.sum(lam) + be) * ev.theta(be) ** (N - 1)
    for i in range(N):
        for j in range(i + 1, N):
            val *= E(mu[i], mu[j]) * E(lam[j], lam[i])
    return complex(val / np.prod(E(mu[:, None], lam[None, :])))


def fay_relative_error(ev: ThetaEvaluator, lambdas, mus, be: complex) -> float:
    lhs = np.linalg.det(fay_matrix(ev, lambdas, mus, be))
    rhs = fay_rhs(ev, lambdas, mus, be)
    return float(abs(lhs - rhs) / abs(rhs))


def fay_criterion(ev: ThetaEvaluator, lambdas, mus, be: complex) -> float:
    """|theta(sum mu - sum lambda + be)| at the reduced representative; zero iff Gamma is singular."""
    x = complex(np.sum(mus) - np.sum(lambdas) + be)
    y = reduce(ev.curve, x).rep
    return float(abs(ev.theta(y)))


# -- closed forms for Gamma -----------------------------------------------------

def gamma_scalar(funcs: CanonicalFunctions, lambdas, mus) -> np.ndarray:
    """[-f_{mu_i}(lambda_j)] by direct evaluation."""
    lam = np.asarray(lambdas, dtype=complex)
    return -np.array([funcs.f_w(m, lam) for m in mus])


def gamma_factorized(funcs: CanonicalFunctions, lambdas, mus) -> np.ndarray:
    """-(1/theta(be)) D_mu M D_lambda."""
    ev, E, be, p0 = funcs.ev, funcs.E, funcs.be, funcs.p0
    lam = np.asarray(lambdas, dtype=complex)
    mu = np.asarray(mus, dtype=complex)
    Dmu = ev.theta(p0 - mu + be) / E(p0, mu)
    Dlam = E(p0, lam) / ev.theta(p0 - lam + be)
    return -(Dmu[:, None] * fay_matrix(ev, lam, mu, be) * Dlam[None, :]) / funcs.theta_be


def gamma_inverse_formula(funcs: CanonicalFunctions, lambdas, mus) -> np.ndarray:
    """Entries of Gamma^-1 (rows by zeros alpha, columns by poles beta) via Fay cofactors.

    The zero-zero prime forms are ordered E(lambda_alpha, lambda_i); the
    reversed order differs by (-1)^(N-1) and fails for even N.
    """
    ev, E, be, p0 = funcs.ev, funcs.E, funcs.be, funcs.p0
    lam = np.asarray(lambdas, dtype=complex)
    mu = np.asarray(mus, dtype=complex)
    N = lam.size
    full = ev.theta(np.sum(mu) - np.sum(lam) + be)
    out = np.zeros((N, N), dtype=complex)
    for a in range(N):
        for b in range(N):
            minor = ev.theta(np.sum(np.delete(mu, b)) - np.sum(np.delete(lam, a)) + be)
            num = np.prod(E(mu, lam[a])) * np.prod(E(mu[b], lam))
            den = np.prod(E(np.delete(mu, b), mu[b])) * np.prod(E(lam[a], np.delete(lam, a)))
            out[a, b] = (-(ev.theta(p0 - lam[a] + be) / E(p0, lam[a])) * minor / full * num / den
                         / E(mu[b], lam[a]) * E(p0, mu[b]) / ev.theta(p0 - mu[b] + be))
    return out


def gamma0(ev: ThetaEvaluator, bundle: FlatLineBundle, lambdas, mus) -> np.ndarray:
    """[-K(chi; mu_i, lambda_j)]."""
    lam = np.asarray(lambdas, dtype=complex)
    return -np.array([cauchy_kernel(ev, bundle, m, lam) for m in mus])


def gamma0_relation_error(funcs: CanonicalFunctions, lambdas, mus) -> float:
    """Gamma = -diag(K(mu_i, p0)) Gamma0(dual bundle) diag(1/K(lambda_j, p0)), relative error."""
    lam = np.asarray(lambdas, dtype=complex)
    mu = np.asarray(mus, dtype=complex)
    G0 = gamma0(funcs.ev, funcs.bundle.dual(), lam, mu)
    left = funcs.K(mu, funcs.p0)
    right = 1.0 / funcs.K(lam, funcs.p0)
    pred = -(left[:, None] * G0 * right[None, :])
    G = gamma_scalar(funcs, lam, mu)
    return float(np.max(np.abs(pred - G)) / np.max(np.abs(G)))


# -- prime-form identities --------------------------------------------------------

def prime_form_solution(ev: ThetaEvaluator, lambdas, mus):
    """p -> prod E(p, lambda_j) / prod E(p, mu_i); single valued for Abel-normalized points."""
    E = PrimeForm(ev.curve, ev)
    lam = np.asarray(lambdas, dtype=complex)
    mu = np.asarray(mus, dtype=complex)

    def f(p):
        p = np.asarray(p, dtype=complex)
        return np.prod(E(p[..., None], lam), axis=-1) / np.prod(E(p[..., None], mu), axis=-1)

    return f


def intid_constant(ev: ThetaEvaluator, lambdas, mus, p0: complex) -> complex:
    E = PrimeForm(ev.curve, ev)
    return complex(np.prod(E(p0, np.asarray(mus))) / np.prod(E(p0, np.asarray(lambdas))))


def intid_residual(funcs: CanonicalFunctions, lambdas, mus, probes) -> float:
    """max |1 + sum Gamma^-1_ij f_{mu_j}(p) - c * prime-form solution(p)| / |rhs|."""
    lam = np.asarray(lambdas, dtype=complex)
    mu = np.asarray(mus, dtype=complex)
    Ginv = np.linalg.inv(gamma_scalar(funcs, lam, mu))
    probes = np.asarray(probes, dtype=complex)
    F = np.array([funcs.f_w(m, probes) for m in mu])  # (N, P)
    lhs = 1.0 + np.einsum("ij,jp->p", Ginv, F)
    rhs = intid_constant(funcs.ev, lam, mu, funcs.p0) * prime_form_solution(funcs.ev, lam, mu)(probes)
    return float(np.max(np.abs(lhs - rhs) / np.abs(rhs)))


def _intid2_sides(ev, E, p1, lam, mu, beta):
    def lhs(p0):
        p0 = np.asarray(p0, dtype=complex)
        tot = 0.0
        for a in range(lam.size):
            w = np.prod(E(mu, lam[a])) / np.prod(E(lam[a], np.delete(lam, a)))
            tot = tot + f_w_moving_base(ev, p1, p0, lam[a], mu[beta]) * w
        return tot

    def rhs(p0):
        p0 = np.asarray(p0, dtype=complex)
        return (np.prod(E(mu[:, None], p0[None]), axis=0) / np.prod(E(p0[None], lam[:, None]), axis=0))

    return lhs, rhs


def intid2_check(ev: ThetaEvaluator, p1: complex, lambdas, mus, probes, radius: float | None = None,
                 config: NumericConfig = DEFAULT) -> dict:
    """Both sides as functions of p0: values on probes and residues at each lambda_alpha."""
    E = PrimeForm(ev.curve, ev)
    lam = np.asarray(lambdas, dtype=complex)
    mu = np.asarray(mus, dtype=complex)
    probes = np.asarray(probes, dtype=complex)
    value_err = 0.0
    residue_err = 0.0
    pts = np.concatenate([lam, mu, [p1]])
    for beta in range(mu.size):
        lhs, rhs = _intid2_sides(ev, E, p1, lam, mu, beta)
        l, r = lhs(probes), rhs(probes)
        value_err = max(value_err, float(np.max(np.abs(l - r) / np.abs(r))))
        for a in range(lam.size):
            clear = min(lattice_distance(ev.curve, lam[a], q) for q in pts if abs(q - lam[a]) > 1e-12)
            rad = radius or min(config.contour_radius, 0.4 * clear)
            spec = ContourSpec(complex(lam[a]), rad, config.contour_nodes)
            rl = laurent_coefficients(lhs, spec, [-1], config=config)[0]
            rr = laurent_coefficients(rhs, spec, [-1], config=config)[0]
            common = -np.prod(E(mu, lam[a])) / np.prod(E(lam[a], np.delete(lam, a)))
            residue_err = max(residue_err, float(abs(rl - common) / abs(common)),
                              float(abs(rr - common) / abs(common)))
    return {"value_error": value_err, "residue_error": residue_err}


# -- suite ---------------------------------------------------------------------

def scalar_abel_fay_suite(curve: EllipticCurve, lambdas, mus, D0: BaseDivisor,
                          probes: int = 20, seed: int = 0, ev: ThetaEvaluator | None = None,
                          config: NumericConfig = DEFAULT) -> dict:
    """Fay determinant, Gamma factorization and inverse, Gamma0 relation and, when the
    Abel condition holds, the two prime-form identities."""
    ev = ev or ThetaEvaluator(curve)
    funcs = CanonicalFunctions(D0, ev, config)
    abel = satisfies_abel(curve, lambdas, mus)
    if abel:
        lam, mu = abel_normalize(curve, lambdas, mus)
    else:
        lam, mu = reps(curve, lambdas), reps(curve, mus)
    report = {"N": int(lam.size), "abel": bool(abel)}
    report["fay_relative_error"] = fay_relative_error(ev, lam, mu, funcs.be)
    report["fay_criterion"] = fay_criterion(ev, lam, mu, funcs.be)
    system = build_gamma(scalar_divisor(curve, lam, mu), D0, ev, config)
    G = gamma_scalar(funcs, lam, mu)
    scale = np.max(np.abs(G))
    report["gamma_assembly_error"] = float(np.max(np.abs(system.gamma - G)) / scale)
    report["gamma_factorization_error"] = float(np.max(np.abs(gamma_factorized(funcs, lam, mu) - G)) / scale)
    report["gamma0_relation_error"] = gamma0_relation_error(funcs, lam, mu)
    verdict, cond = system.invertibility(config)
    report["gamma_verdict"] = verdict
    report["gamma_condition"] = cond
    if verdict == "invertible" and report["fay_criterion"] > 1e-8:
        Ginv = np.linalg.inv(G)
        report["gamma_inverse_error"] = float(np.max(np.abs(gamma_inverse_formula(funcs, lam, mu) - Ginv))
                                              / np.max(np.abs(Ginv)))
    if abel:
        rng = np.random.default_rng(seed)
        avoid = np.concatenate([lam, mu, [funcs.p1, funcs.p0]])
        pts = []
        while len(pts) < probes:
            p = curve.from_coords(*rng.random(2))
            if min(lattice_distance(curve, p, q) for q in avoid) > 0.05:
                pts.append(p)
        report["intid_residual"] = intid_residual(funcs, lam, mu, pts)
        report["intid_constant"] = [intid_constant(ev, lam, mu, funcs.p0).real,
                                    intid_constant(ev, lam, mu, funcs.p0).imag]
        chk = intid2_check(ev, funcs.p1, lam, mu, pts[:5], config=config)
        report["intid2_value_error"] = chk["value_error"]
        report["intid2_residue_error"] = chk["residue_error"]
    return report
