import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

import helpers
from elltriv.abel_fay import (abel_completion, abel_normalize, fay_criterion, fay_relative_error,
                              gamma_factorized, gamma_inverse_formula, gamma_scalar, gamma0_relation_error,
                              intid2_check, intid_residual, prime_form_solution, satisfies_abel,
                              scalar_abel_fay_suite)
from elltriv.divisors import BaseDivisor
from elltriv.kernels_g1 import CanonicalFunctions
from elltriv.theta import ThetaEvaluator
from elltriv.torus import EllipticCurve, lattice_distance

TAUS = [1j, 0.3 + 0.8j]


def instance(curve, rng, N, abel=True):
    """Separated zeros, poles and base points; the last pole completes the Abel sum if asked."""
    while True:
        pts = helpers.separated_points(curve, rng, 2 * N + 2)
        lam, mu, (p1, p0) = pts[:N], pts[N:2 * N], pts[2 * N:]
        if abel and N > 1:
            mu[-1] = abel_completion(curve, lam, mu[:-1])
        everything = np.concatenate([lam, mu, [p1, p0]])
        gaps = [lattice_distance(curve, a, b) for i, a in enumerate(everything) for b in everything[i + 1:]]
        if min(gaps) > 0.1 and (not abel or N > 1):
            lam_n, mu_n = abel_normalize(curve, lam, mu) if abel else (lam, mu)
            return lam_n, mu_n, BaseDivisor(curve, p1, p0)


@pytest.mark.parametrize("tau", TAUS)
@pytest.mark.parametrize("N", [1, 2, 3])
def test_fay_determinant(tau, N, rng):
    curve = EllipticCurve(tau)
    ev = ThetaEvaluator(curve)
    for _ in range(5):
        lam, mu, D0 = instance(curve, rng, N, abel=False)
        funcs = CanonicalFunctions(D0, ev)
        assert fay_relative_error(ev, lam, mu, funcs.be) < 1e-8


@pytest.mark.parametrize("tau", TAUS)
@pytest.mark.parametrize("N", [1, 2, 3])
def test_gamma_closed_forms(tau, N, rng):
    curve = EllipticCurve(tau)
    ev = ThetaEvaluator(curve)
    for _ in range(5):
        lam, mu, D0 = instance(curve, rng, N, abel=False)
        funcs = CanonicalFunctions(D0, ev)
        G = gamma_scalar(funcs, lam, mu)
        scale = np.max(np.abs(G))
        assert np.max(np.abs(gamma_factorized(funcs, lam, mu) - G)) < 1e-8 * scale
        assert gamma0_relation_error(funcs, lam, mu) < 1e-8
        if fay_criterion(ev, lam, mu, funcs.be) > 1e-6:
            Ginv = np.linalg.inv(G)
            err = np.max(np.abs(gamma_inverse_formula(funcs, lam, mu) - Ginv)) / np.max(np.abs(Ginv))
            assert err < 1e-8


def test_inverse_formula_zero_order_matters(rng):
    # Swapping the zero-zero prime forms flips the sign by (-1)^(N-1); N=2 catches it.
    curve = EllipticCurve(1j)
    ev = ThetaEvaluator(curve)
    lam, mu, D0 = instance(curve, rng, 2, abel=False)
    funcs = CanonicalFunctions(D0, ev)
    Ginv = np.linalg.inv(gamma_scalar(funcs, lam, mu))
    assert np.max(np.abs(-gamma_inverse_formula(funcs, lam, mu) - Ginv)) > 1e-3 * np.max(np.abs(Ginv))


@pytest.mark.parametrize("N", [2, 3])
def test_prime_form_identities(N, rng):
    curve = EllipticCurve(0.3 + 0.8j)
    ev = ThetaEvaluator(curve)
    lam, mu, D0 = instance(curve, rng, N)
    funcs = CanonicalFunctions(D0, ev)
    probes = helpers.separated_points(curve, rng, 8, np.concatenate([lam, mu, [D0.p0.rep, D0.p1.rep]]))
    assert intid_residual(funcs, lam, mu, probes) < 1e-6
    chk = intid2_check(ev, D0.p1.rep, lam, mu, probes[:4])
    assert chk["value_error"] < 1e-6
    assert chk["residue_error"] < 1e-6


def test_prime_form_solution_is_elliptic_after_normalization(rng):
    curve = EllipticCurve(0.3 + 0.8j)
    ev = ThetaEvaluator(curve)
    lam, mu, _ = instance(curve, rng, 3)
    f = prime_form_solution(ev, lam, mu)
    p = np.array(helpers.separated_points(curve, rng, 5, np.concatenate([lam, mu])))
    assert_allclose(f(p + 1), f(p), rtol=1e-9)
    assert_allclose(f(p + curve.tau), f(p), rtol=1e-9)


def test_suite_report(rng):
    curve = EllipticCurve(1j)
    lam, mu, D0 = instance(curve, rng, 3)
    rep = scalar_abel_fay_suite(curve, lam, mu, D0)
    assert rep["abel"] and rep["gamma_verdict"] == "invertible"
    assert rep["gamma_assembly_error"] < 1e-8
    assert rep["intid_residual"] < 1e-6
    rep = scalar_abel_fay_suite(curve, *instance(curve, rng, 2, abel=False))
    assert not rep["abel"] and "intid_residual" not in rep


@given(st.integers(-3, 3), st.integers(-3, 3))
def test_abel_normalize_absorbs_lattice_offsets(m, n):
    curve = EllipticCurve(0.3 + 0.8j)
    lam = np.array([0.2 + 0.3j, 0.5 + 0.1j])
    mu = np.array([0.7 + 0.2j, lam.sum() - 0.7 - 0.2j + m + n * curve.tau])
    assert satisfies_abel(curve, lam, mu)
    lam_n, mu_n = abel_normalize(curve, lam, mu)
    assert abs(lam_n.sum() - mu_n.sum()) < 1e-12
    assert not satisfies_abel(curve, lam, mu + 0.01)
    with pytest.raises(ValueError):
        abel_normalize(curve, lam, mu + 0.01)
