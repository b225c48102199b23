"""Random admissible null-pole triples and divisors for tests."""
import numpy as np

from elltriv.divisors import MatrixDivisor
from elltriv.nullpole import SylvesterDataSet, membership, similarity
from elltriv.torus import lattice_distance

JORDAN = np.array([[0, 1], [0, 0]], dtype=complex)


def crandn(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def simple_zero(rng, r):
    return SylvesterDataSet.build(r, Bz=crandn(rng, r, 1), Az=np.zeros((1, 1)))


def simple_pole(rng, r):
    return SylvesterDataSet.build(r, Api=np.zeros((1, 1)), Cpi=crandn(rng, 1, r))


def jordan_zero(rng, r):
    return SylvesterDataSet.build(r, Bz=crandn(rng, r, 2), Az=JORDAN)


def jordan_pole(rng, r):
    return SylvesterDataSet.build(r, Api=JORDAN, Cpi=crandn(rng, 2, r))


def mixed_simple(rng, r):
    """Simple zero and simple pole at one point, coupled by a random S (needs Cpi Bz = 0)."""
    C = crandn(rng, 1, r)
    B = np.zeros((r, 1), dtype=complex)
    B[0, 0], B[1, 0] = C[0, 1], -C[0, 0]
    return SylvesterDataSet.build(r, Bz=B, Az=np.zeros((1, 1)), Api=np.zeros((1, 1)), Cpi=C,
                                  S=crandn(rng, 1, 1))


def mixed_jordan(rng):
    """Rank 2, Jordan zero and Jordan pole at one point: Bz = I, Cpi = J S - S J."""
    S = crandn(rng, 2, 2)
    return SylvesterDataSet.build(2, Bz=np.eye(2), Az=JORDAN, Api=JORDAN, Cpi=JORDAN @ S - S @ JORDAN, S=S)


# degree-zero layouts with at most three support points
LAYOUTS = {
    1: [("zero", "pole"), ("zero", "zero", "jpole"), ("jzero", "jpole"), ("jzero", "pole", "pole")],
    2: [("jzero", "jpole"), ("mixed",), ("mjordan",), ("zero", "zero", "jpole"), ("mixed", "zero", "pole")],
}


def make_triple(kind, rng, r):
    return {"zero": simple_zero, "pole": simple_pole, "jzero": jordan_zero, "jpole": jordan_pole,
            "mixed": mixed_simple}[kind](rng, r) if kind != "mjordan" else mixed_jordan(rng)


def separated_points(curve, rng, count, avoid=(), margin=0.12):
    pts = []
    while len(pts) < count:
        u = curve.from_coords(*rng.random(2))
        if all(lattice_distance(curve, u, q) >= margin for q in list(avoid) + pts):
            pts.append(u)
    return pts


def random_divisor(curve, rng, r, layout, avoid=()):
    pts = separated_points(curve, rng, len(layout), avoid)
    return MatrixDivisor(curve, r, [(p, make_triple(k, rng, r)) for p, k in zip(pts, layout)])


# -- null-pole rows and germs -------------------------------------------------

E1 = SylvesterDataSet.build(1, Bz=[[1.0, 0.0]], Az=JORDAN)
TRIPLE_KINDS = ["zero", "pole", "jzero", "jpole", "mixed", "mjordan"]


def random_triple(kind, rng):
    return make_triple(kind, rng, 2)


def poly_row(coeffs):
    """h(z) = sum_k coeffs[k] z^k for row coefficients of shape (K, r)."""
    return lambda z: sum(np.multiply.outer(np.asarray(z) ** k, c) for k, c in enumerate(coeffs))


def row_function(T, x, coeffs, extra=None):
    """x (zI - Api)^-1 Cpi + polynomial row; optional extra pole term extra / z^(npi + 1)."""
    poly = poly_row(coeffs)

    def h(z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = poly(z)
        for k in range(T.npi):
            out = out + np.multiply.outer(z ** -(k + 1), x @ np.linalg.matrix_power(T.Api, k) @ T.Cpi)
        if extra is not None:
            out = out + np.multiply.outer(z ** -(T.npi + 1), extra)
        return out

    return h


def random_member(T, rng, member=True):
    """A row in the singular subspace at 0 (or, with member=False, one violating it)."""
    x = crandn(rng, T.npi)
    K = max(T.nz, 1) + 1
    coeffs = crandn(rng, K, T.r)
    if T.nz:
        # enforce x S = sum_k c_k Bz Az^k by correcting c_0 .. c_{nz-1} in least squares
        M = np.vstack([T.Bz @ np.linalg.matrix_power(T.Az, k) for k in range(T.nz)])
        target = (x @ T.S if T.npi else np.zeros(T.nz)) - sum(
            coeffs[k] @ T.Bz @ np.linalg.matrix_power(T.Az, k) for k in range(T.nz, K))
        sol, *_ = np.linalg.lstsq(M.T, target, rcond=None)
        coeffs[: T.nz] = sol.reshape(T.nz, T.r)
    extra = None
    if not member:
        if T.nz:
            coeffs[0] = coeffs[0] + crandn(rng, T.r)
        else:
            extra = crandn(rng, T.r)
    return row_function(T, x, coeffs, extra)



def membership_trials(seed, transform):
    """Verdict agreement between (h, T) and transform(h, T) over randomized trials."""
    rng = np.random.default_rng(seed)
    agree, members = 0, 0
    trials = 20
    for k in range(trials):
        T = random_triple(TRIPLE_KINDS[k % len(TRIPLE_KINDS)], rng)
        want = bool(k % 2)
        h = random_member(T, rng, want)
        base = membership(h, T, 0.0)
        h2, T2 = transform(h, T, rng)
        agree += bool(base) == bool(membership(h2, T2, 0.0))
        members += bool(base) == want
    return agree, members, trials


def similar(h, T, rng):
    U = np.eye(T.nz) + 0.3 * crandn(rng, T.nz, T.nz)
    V = np.eye(T.npi) + 0.3 * crandn(rng, T.npi, T.npi)
    return h, similarity(T, U, V)


def left_factor(h, T, rng):
    a, b = crandn(rng, 2)
    phi = lambda z: (2 + b * np.asarray(z)) * np.exp(0.3 * a * np.asarray(z))  # noqa: E731
    return (lambda z: phi(z)[..., None] * h(z)), T


def diag_germ(P, M):
    """F(u) = (I + u M) diag(1/u, u) P with its null-pole triple at 0."""
    def F(u):
        u = np.atleast_1d(np.asarray(u, dtype=complex))
        D = np.zeros(u.shape + (2, 2), dtype=complex)
        D[:, 0, 0], D[:, 1, 1] = 1 / u, u
        L = np.eye(2) + u[:, None, None] * M
        return L @ D @ P

    T = SylvesterDataSet.build(2, Bz=np.linalg.solve(P, [[0], [1]]), Az=[[0.0]], Api=[[0.0]],
                               Cpi=np.array([[1.0, 0.0]]) @ P, S=[[0.0]])
    return F, T


def inverse_transpose(F):
    return lambda u: np.linalg.inv(F(u)).swapaxes(-1, -2)
