import numpy as np
import pytest
from numpy.testing import assert_allclose

import helpers
from elltriv.nullpole import (SimpleNullPoleData, SylvesterDataSet, adjoint, check_simple_structure, is_admissible,
                              membership, similarity, simple_to_divisor_entries, verify_local_interpolation)
from elltriv.trivialize import block_theta_triv, extend_trivialization, log_shift

from helpers import E1, TRIPLE_KINDS, diag_germ, inverse_transpose, left_factor, membership_trials, random_member, random_triple, similar




def test_example_triple_verdicts():
    assert is_admissible(E1)[0]
    assert membership(lambda u: u**2, E1, 0.0)
    assert membership(lambda u: u**3, E1, 0.0)
    assert not membership(lambda u: u, E1, 0.0)
    assert not membership(lambda u: np.ones_like(u), E1, 0.0)


def test_example_triple_similarity():
    T2 = similarity(E1, np.diag([2.0, 1.0]), np.zeros((0, 0)))
    for h in (lambda u: u**2, lambda u: u**3, lambda u: u, lambda u: np.ones_like(u)):
        assert bool(membership(h, E1, 0.0)) == bool(membership(h, T2, 0.0))


def test_pole_only_membership():
    T = SylvesterDataSet.build(1, Api=[[0.0]], Cpi=[[1.0]])
    res = membership(lambda u: 1 / u, T, 0.0)
    assert res
    assert_allclose(res.x, [1.0], atol=1e-12)
    assert not membership(lambda u: 1 / u**2, T, 0.0)


def test_admissibility_diagnostics():
    assert is_admissible(SylvesterDataSet.empty(2)) == (True, [])
    ok, why = is_admissible(SylvesterDataSet.build(1, Api=np.eye(1), Cpi=[[1.0]]))
    assert not ok and "Api not nilpotent" in why
    ok, why = is_admissible(SylvesterDataSet.build(1, Api=[[0.0]], Cpi=[[0.0]]))
    assert not ok and "(Api, Cpi) not controllable" in why


def test_build_shape_errors():
    with pytest.raises(ValueError):
        SylvesterDataSet.build(2, Bz=np.ones((3, 1)), Az=np.zeros((1, 1)))


def test_adjoint_examples():
    A = adjoint(E1)
    assert A.nz == 0 and A.npi == 2
    assert_allclose(A.Api, E1.Az.T)
    assert_allclose(A.Cpi, E1.Bz.T)
    assert adjoint(SylvesterDataSet.empty(1)).same(SylvesterDataSet.empty(1))


@pytest.mark.parametrize("kind", TRIPLE_KINDS)
def test_adjoint_involution_and_admissibility(kind, rng):
    T = random_triple(kind, rng)
    assert is_admissible(T)[0]
    assert is_admissible(adjoint(T))[0]
    assert adjoint(adjoint(T)).same(T)


def test_similarity_identity_and_singular(rng):
    T = random_triple("mjordan", rng)
    assert similarity(T, np.eye(2), np.eye(2)).same(T)
    with pytest.raises(ValueError):
        similarity(T, np.zeros((2, 2)), np.eye(2))


@pytest.mark.parametrize("kind", TRIPLE_KINDS)
def test_generated_rows_have_expected_verdicts(kind, rng):
    T = random_triple(kind, rng)
    assert membership(random_member(T, rng), T, 0.0)
    assert not membership(random_member(T, rng, member=False), T, 0.0)


@pytest.mark.parametrize("transform", [similar, left_factor])
def test_membership_invariance(transform):
    agree, expected, trials = membership_trials(7, transform)
    assert expected == trials
    assert agree == trials


def test_local_interpolation_scalar():
    assert verify_local_interpolation(lambda u: np.asarray(u) ** 2, E1, 0.0)
    rep = verify_local_interpolation(lambda u: np.asarray(u), E1, 0.0)
    assert not rep and rep.winding == 1


def test_local_interpolation_diagonal_example():
    F, T = diag_germ(np.eye(2), np.zeros((2, 2)))
    assert verify_local_interpolation(F, T, 0.0)


@pytest.mark.parametrize("seed", range(5))
def test_adjoint_duality(seed):
    rng = np.random.default_rng(seed)
    P = np.eye(2) + 0.4 * helpers.crandn(rng, 2, 2)
    F, T = diag_germ(P, 0.5 * helpers.crandn(rng, 2, 2))
    assert verify_local_interpolation(F, T, 0.0)
    assert verify_local_interpolation(inverse_transpose(F), adjoint(T), 0.0)
    # a triple from a different germ is rejected on both sides
    _, wrong = diag_germ(np.eye(2) + 0.4 * helpers.crandn(rng, 2, 2), np.zeros((2, 2)))
    assert not verify_local_interpolation(F, wrong, 0.0)
    assert not verify_local_interpolation(inverse_transpose(F), adjoint(wrong), 0.0)


def test_simple_data_validation(square):
    with pytest.raises(ValueError):
        SimpleNullPoleData(square, [(0.2, [1.0])], [])
    with pytest.raises(ValueError):
        SimpleNullPoleData(square, [(0.2, [1.0])], [(1.2, [1.0])])
    with pytest.raises(ValueError):
        SimpleNullPoleData(square, [(0.2, [0.0])], [(0.7, [1.0])])


def test_simple_to_divisor_entries(square):
    assert simple_to_divisor_entries(SimpleNullPoleData(square, [], [])) == []
    d = SimpleNullPoleData(square, [(0.2, [1.0, 0.0])], [(0.7, [0.0, 1.0])])
    entries = simple_to_divisor_entries(d)
    assert len(entries) == 2
    (_, Tz), (_, Tp) = entries
    assert (Tz.nz, Tz.npi, Tp.nz, Tp.npi) == (1, 0, 0, 1)
    assert all(is_admissible(T)[0] for _, T in entries)
    assert sum(T.nz - T.npi for _, T in entries) == 0


def test_simple_structure_scalar(square):
    e1 = extend_trivialization(square, None, 2.0)
    assert check_simple_structure(e1.F, e1.data)


def test_simple_structure_extension(square):
    e1 = extend_trivialization(square, None, 2.0)
    e2 = extend_trivialization(square, e1.F, 2.0, data=e1.data)
    rep = check_simple_structure(e2.F, e2.data)
    assert rep.ok and e2.data.N == 2


def test_simple_structure_negative_control(square):
    F = block_theta_triv(square, 2.0, 2)
    delta = square.half_period
    d = SimpleNullPoleData(square, [(delta + log_shift(2.0), [1, 0]), (0.2, [0, 1])],
                           [(delta, [1, 0]), (0.7 + 0.2j, [0, 1])])
    assert not check_simple_structure(F, d)
