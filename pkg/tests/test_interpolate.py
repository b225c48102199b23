import numpy as np
import pytest

import helpers
from elltriv.abel_fay import abel_completion, prime_form_solution, scalar_divisor
from elltriv.config import DEFAULT
from elltriv.divisors import BaseDivisor, MatrixDivisor
from elltriv.errors import IndeterminateError
from elltriv.interpolate import (assemble_row, build_gamma, gamma_block_oracle, left_kernel, membership_row_test,
                                 pointwise_membership, random_base_divisor, section_count, side_constraint,
                                 solve_first, solve_second_existence)
from elltriv.nullpole import SylvesterDataSet
from elltriv.theta import ThetaEvaluator
from elltriv.torus import EllipticCurve, lattice_distance

CURVE = EllipticCurve(0.3 + 0.8j)
EV = ThetaEvaluator(CURVE)
SQUARE = EllipticCurve(1j)
EV_SQUARE = ThetaEvaluator(SQUARE)


def base_away_from(D, rng):
    p1, p0 = helpers.separated_points(D.curve, rng, 2, [p.rep for p in D.support])
    return BaseDivisor(D.curve, p1, p0)


def layouts():
    return [(r, layout) for r, group in helpers.LAYOUTS.items() for layout in group]


@pytest.mark.parametrize("seed, r, layout", [(k, *item) for k, item in enumerate(layouts())])
def test_blocks_match_contour_oracle(seed, r, layout):
    rng = np.random.default_rng(seed)
    D = helpers.random_divisor(CURVE, rng, r, layout)
    system = build_gamma(D, base_away_from(D, rng), EV)
    for i in range(len(system.rows)):
        for j in range(len(system.cols)):
            ref = gamma_block_oracle(system, i, j)
            assert np.max(np.abs(system.block(i, j) - ref)) < 1e-7 * max(1.0, np.max(np.abs(ref)))


def test_build_gamma_preconditions(rng):
    D = MatrixDivisor(CURVE, 1, [(0.2 + 0.1j, helpers.simple_zero(rng, 1))])
    with pytest.raises(ValueError):
        build_gamma(D, BaseDivisor(CURVE, 0.5, 0.7), EV)
    D = helpers.random_divisor(CURVE, rng, 1, ("zero", "pole"))
    p = D.support[0].rep
    with pytest.raises(ValueError):
        build_gamma(D, BaseDivisor(CURVE, p, p + 0.3), EV)


@pytest.mark.parametrize("r, layout", [(1, ("zero", "zero", "jpole")), (2, ("mjordan",)),
                                       (2, ("mixed", "zero", "pole"))])
def test_row_test_matches_pointwise_membership(r, layout):
    rng = np.random.default_rng(3)
    D = helpers.random_divisor(CURVE, rng, r, layout)
    system = build_gamma(D, base_away_from(D, rng), EV)
    u0 = helpers.crandn(rng, r)
    good = np.linalg.solve(system.gamma.T, system.Bz_row.T @ u0)
    bad = good + 0.1 * helpers.crandn(rng, good.size)
    for u, expected in ((good, True), (bad, False)):
        assert membership_row_test(system, u0, u) == expected
        verdicts = [bool(m) for m in pointwise_membership(system, assemble_row(system, u0, u))]
        assert all(verdicts) == expected


def singular_instance(rng, N):
    """Scalar simple data and a base divisor with p1 = p0 + sum(lambda) - sum(mu)."""
    while True:
        pts = helpers.separated_points(CURVE, rng, 2 * N + 1)
        lam, mu, p0 = pts[:N], pts[N:2 * N], pts[-1]
        p1 = p0 + sum(lam) - sum(mu)
        if min(lattice_distance(CURVE, p1, q) for q in pts) > 0.1:
            return scalar_divisor(CURVE, lam, mu), BaseDivisor(CURVE, p1, p0)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_singular_gamma_detected(N, rng):
    D, D0 = singular_instance(rng, N)
    system = build_gamma(D, D0, EV)
    verdict, cond = system.invertibility()
    assert verdict == "singular" and cond >= DEFAULT.gamma_cond_max
    assert section_count(system) == 1
    kernel = left_kernel(system)
    assert kernel.shape == (1, N)
    assert np.linalg.norm(kernel @ system.gamma) < 1e-10 * system.scale()
    assert not solve_first(D, D0, ev=EV)


def test_indeterminate_band(rng):
    D = helpers.random_divisor(CURVE, rng, 1, ("zero", "zero", "pole", "pole"))
    system = build_gamma(D, base_away_from(D, rng), EV)
    cfg = DEFAULT.replace(gamma_sv_rtol=0.99, gamma_cond_max=1e300, kernel_gap=0.999)
    assert system.invertibility(cfg)[0] == "indeterminate"
    with pytest.raises(IndeterminateError):
        section_count(system, cfg)
    with pytest.raises(IndeterminateError):
        solve_first(D, system.base, ev=EV, config=cfg)


def abel_instance():
    lam = [0.2 + 0.3j, 0.55 + 0.7j]
    mu = [0.8 + 0.15j, abel_completion(SQUARE, lam, [0.8 + 0.15j])]
    return lam, mu, BaseDivisor(SQUARE, 0.1 + 0.85j, 0.65 + 0.3j)


def test_scalar_abel_solution():
    lam, mu, D0 = abel_instance()
    sol = solve_first(scalar_divisor(SQUARE, lam, mu), D0, ev=EV_SQUARE)
    assert sol
    assert sol.side_abs < 1e-7
    assert sol.certificate["ok"]
    assert sol.certificate["periodicity"] < 1e-7
    p = np.array([0.4 + 0.1j, 0.9 + 0.9j, 0.05 + 0.5j, 0.33 + 0.52j])
    ratio = sol.K.scalar(p) / prime_form_solution(EV_SQUARE, lam, mu)(p)
    assert np.max(np.abs(ratio - ratio[0])) < 1e-6 * abs(ratio[0])
    assert abs(sol.K.scalar(D0.p0.rep) - 1) < 1e-10


def test_scalar_non_abel_has_no_solution():
    D0 = BaseDivisor(SQUARE, 0.1 + 0.85j, 0.65 + 0.3j)
    out = solve_first(scalar_divisor(SQUARE, [0.2 + 0.3j], [0.7 + 0.6j]), D0, ev=EV_SQUARE)
    assert not out
    assert out.reason == "side constraint violated"
    assert out.side_abs > 1e-3
    assert out.to_dict()["verdict"] == "NoSolution"


def test_rank_two_direct_sum():
    lam1, mu1, D0 = abel_instance()
    lam2 = [0.3 + 0.1j, 0.75 + 0.45j]
    mu2 = [0.15 + 0.6j, abel_completion(SQUARE, lam2, [0.15 + 0.6j])]
    e1, e2 = np.array([[1.0], [0.0]]), np.array([[0.0], [1.0]])
    zero = lambda b: SylvesterDataSet.build(2, Bz=b, Az=[[0.0]])  # noqa: E731
    pole = lambda b: SylvesterDataSet.build(2, Api=[[0.0]], Cpi=b.T)  # noqa: E731
    entries = ([(z, zero(e1)) for z in lam1] + [(m, pole(e1)) for m in mu1]
               + [(z, zero(e2)) for z in lam2] + [(m, pole(e2)) for m in mu2])
    sol = solve_first(MatrixDivisor(SQUARE, 2, entries), D0, ev=EV_SQUARE)
    assert sol and sol.certificate["ok"]
    p = np.array([0.4 + 0.1j, 0.9 + 0.9j])
    K = sol.K(p)
    assert np.max(np.abs(K[:, 0, 1])) < 1e-10 and np.max(np.abs(K[:, 1, 0])) < 1e-10


def test_generic_matrix_divisor_fails_side_constraint(rng):
    D = helpers.random_divisor(CURVE, rng, 2, ("jzero", "jpole"))
    system = build_gamma(D, base_away_from(D, rng), EV)
    assert side_constraint(system)[1] > 1e-6
    assert not solve_first(D, system.base, ev=EV)


def test_solve_first_rejects_singular_u0(rng):
    lam, mu, D0 = abel_instance()
    with pytest.raises(ValueError):
        solve_first(scalar_divisor(SQUARE, lam, mu), D0, U0=[[0.0]], ev=EV_SQUARE)


def test_second_problem(rng):
    D = helpers.random_divisor(CURVE, rng, 2, ("mixed", "zero", "pole"))
    cert = solve_second_existence(D, trials=10, seed=1, ev=EV)
    assert cert.found and cert.trials_used <= 10
    assert build_gamma(D, cert.base, EV).invertibility()[0] == "invertible"
    empty = solve_second_existence(MatrixDivisor(CURVE, 1, []))
    assert empty.found and empty.trials_used == 0
    with pytest.raises(ValueError):
        solve_second_existence(MatrixDivisor(CURVE, 1, [(0.3, helpers.simple_zero(rng, 1))]))


def test_random_base_divisor_margin(rng):
    D = helpers.random_divisor(CURVE, rng, 1, ("zero", "pole"))
    for _ in range(10):
        D0 = random_base_divisor(D, rng)
        pts = [p.rep for p in D.support]
        assert all(not D0.p1.same_as(q) and not D0.p0.same_as(q) for q in pts)


@pytest.mark.parametrize("r, layout", [(1, ("zero", "zero", "jpole")), (2, ("mjordan",))])
def test_invertibility_survives_small_perturbation(r, layout):
    rng = np.random.default_rng(11)
    D = helpers.random_divisor(CURVE, rng, r, layout)
    D0 = base_away_from(D, rng)
    system = build_gamma(D, D0, EV)
    assert system.invertibility()[0] == "invertible"
    direction = np.exp(2j * np.pi * rng.random())
    moved = MatrixDivisor(CURVE, r, [(p.rep + 1e-3 * direction, T) for p, T in D.entries])
    assert build_gamma(moved, D0, EV).invertibility()[0] == "invertible"
