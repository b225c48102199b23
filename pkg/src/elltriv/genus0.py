"""Genus-0 baseline: rational zero-pole interpolation in product and Cauchy-matrix form."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CauchyConvention:
    """S = sign * [1/(mu_j - lambda_i)], rows by zeros i; ``transpose`` flips that orientation."""

    sign: int
    transpose: bool


# Fixed by calibrate_genus0(); the negated matrix gives (z-3)/(z-2) for lambda=1, mu=2.
GENUS0_CONVENTION = CauchyConvention(sign=+1, transpose=False)


def _check(lambdas, mus):
    lam = np.asarray(lambdas, dtype=complex).ravel()
    mu = np.asarray(mus, dtype=complex).ravel()
    if lam.size != mu.size:
        raise ValueError("need equally many zeros and poles")
    pts = np.concatenate([lam, mu])
    gaps = np.abs(pts[:, None] - pts[None, :]) + np.eye(pts.size)
    if pts.size and gaps.min() < 1e-12:
        raise ValueError("zeros and poles must be distinct")
    return lam, mu


def cauchy_matrix(lambdas, mus, convention: CauchyConvention = GENUS0_CONVENTION) -> np.ndarray:
    lam, mu = _check(lambdas, mus)
    S = convention.sign / (mu[None, :] - lam[:, None])
    return S.T if convention.transpose else S


def product_form(lambdas, mus, z) -> np.ndarray:
    lam, mu = _check(lambdas, mus)
    z = np.asarray(z, dtype=complex)
    return np.prod(z[..., None] - lam, axis=-1) / np.prod(z[..., None] - mu, axis=-1)


def realization_form(lambdas, mus, z, convention: CauchyConvention = GENUS0_CONVENTION) -> np.ndarray:
    """1 + ones . diag((z - mu_j)^-1) . S^-1 . ones."""
    lam, mu = _check(lambdas, mus)
    z = np.asarray(z, dtype=complex)
    weights = np.linalg.solve(cauchy_matrix(lam, mu, convention), np.ones(lam.size))
    return 1.0 + np.sum(weights / (z[..., None] - mu), axis=-1)


def _deviation(lam, mu, z, conv) -> float:
    p = product_form(lam, mu, z)
    q = realization_form(lam, mu, z, conv)
    return float(np.max(np.abs(p - q) / np.maximum(1.0, np.abs(p))))


def calibrate_genus0(tol: float = 1e-9) -> CauchyConvention:
    """Brute force over sign and orientation: N=1 fixes the sign, N=2 the orientation."""
    probes = np.array([0.3 + 0.7j, -1.1 + 0.2j, 2.5 - 1.3j, 0.9 - 0.4j])
    cases = [([1.0], [2.0]), ([0.1 + 0.2j, 1.3 - 0.5j], [-0.7 + 1.1j, 2.2 + 0.4j])]
    survivors = [CauchyConvention(s, t) for s, t in itertools.product((1, -1), (False, True))]
    for lam, mu in cases:
        survivors = [c for c in survivors if _deviation(lam, mu, probes, c) < tol]
    if len(survivors) != 1:
        raise RuntimeError(f"calibration is ambiguous: {survivors}")
    return survivors[0]


def genus0_cauchy_solve(lambdas, mus, probes=None, convention: CauchyConvention = GENUS0_CONVENTION):
    """(product form, realization form, max relative deviation on the probes)."""
    lam, mu = _check(lambdas, mus)
    if probes is None:
        rng = np.random.default_rng(0)
        span = max(1.0, float(np.max(np.abs(np.concatenate([lam, mu])))) if lam.size else 1.0)
        probes = span * (rng.uniform(-2, 2, 40) + 1j * rng.uniform(-2, 2, 40))
        pts = np.concatenate([lam, mu])
        if pts.size:
            probes = probes[np.min(np.abs(probes[:, None] - pts[None, :]), axis=1) > 1e-3 * span]
    probes = np.asarray(probes, dtype=complex)
    return (lambda z: product_form(lam, mu, z), lambda z: realization_form(lam, mu, z, convention),
            _deviation(lam, mu, probes, convention))
