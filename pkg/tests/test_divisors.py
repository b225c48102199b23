import numpy as np
import pytest

import helpers
from elltriv.divisors import BaseDivisor, MatrixDivisor, adjoint_divisor, degree, is_cd_admissible, partition
from elltriv.nullpole import SylvesterDataSet


def test_rejects_bad_entries(square, rng):
    T = helpers.simple_zero(rng, 1)
    with pytest.raises(ValueError):
        MatrixDivisor(square, 2, [(0.2, T)])
    with pytest.raises(ValueError):
        MatrixDivisor(square, 1, [(0.2, T), (1.2, helpers.simple_pole(rng, 1))])
    bad = SylvesterDataSet.build(1, Api=np.eye(1), Cpi=[[1.0]])
    with pytest.raises(ValueError):
        MatrixDivisor(square, 1, [(0.2, bad)])


def test_empty_triples_dropped(square):
    D = MatrixDivisor(square, 1, [(0.3, SylvesterDataSet.empty(1))])
    assert len(D) == 0 and degree(D) == 0


def test_partition_and_degree(square, rng):
    D = helpers.random_divisor(square, rng, 2, ("mixed", "zero", "jpole", "pole"))
    part = partition(D)
    assert (part.n_inf, part.n_c, part.n_0) == (2, 1, 1)
    assert (part.nP, part.nZ) == (3, 2)
    assert degree(D) == 1 - 1 + 1 - 2 - 1 + 0


@pytest.mark.parametrize("seed", range(5))
def test_adjoint_divisor(square, seed):
    rng = np.random.default_rng(seed)
    D = helpers.random_divisor(square, rng, 2, ("jzero", "pole", "mixed"))
    A = adjoint_divisor(D)
    assert degree(A) == -degree(D)
    back = adjoint_divisor(A)
    assert all(T.same(S) for (_, T), (_, S) in zip(back.entries, D.entries))


def test_base_divisor(square, rng):
    with pytest.raises(ValueError):
        BaseDivisor(square, 0.2, 1.2)
    D = helpers.random_divisor(square, rng, 1, ("zero", "pole"))
    p = D.support[0].rep
    assert not is_cd_admissible(BaseDivisor(square, p, p + 0.3), D)
    far = helpers.separated_points(square, rng, 2, [q.rep for q in D.support])
    assert is_cd_admissible(BaseDivisor(square, *far), D)
