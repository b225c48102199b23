"""Contour quadrature, winding numbers and small dense linear algebra."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, NumericConfig
from .errors import ContourError


@dataclass(frozen=True)
class ContourSpec:
    center: complex
    radius: float
    nodes: int = DEFAULT.contour_nodes

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.nodes < 4 or self.nodes & (self.nodes - 1):
            raise ValueError("nodes must be a power of two >= 4")

    def points(self, nodes: int | None = None) -> np.ndarray:
        n = nodes or self.nodes
        return self.center + self.radius * np.exp(2j * np.pi * np.arange(n) / n)


def sample(f, z: np.ndarray) -> np.ndarray:
    """Evaluate ``f`` at each point of ``z``; leading axis indexes points.

    ``f`` may be vectorized or scalar-only; scalar-only callables are looped.
    """
    try:
        out = np.asarray(f(z), dtype=complex)
        if out.ndim >= 1 and out.shape[0] == z.shape[0]:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([np.asarray(f(complex(zz)), dtype=complex) for zz in z])


def _fft_coefficients(values: np.ndarray, radius: float, orders) -> np.ndarray:
    n = values.shape[0]
    spectrum = np.fft.fft(values, axis=0) / n
    orders = np.asarray(orders)
    return np.stack([spectrum[k % n] * radius ** (-float(k)) for k in orders])


def laurent_coefficients(f, spec: ContourSpec, orders, *, check: bool = True,
                         config: NumericConfig = DEFAULT, return_error: bool = False):
    """Laurent coefficients c_k = (1/2 pi i) \\oint f(z) (z-c)^(-k-1) dz for each k in ``orders``.

    Trapezoidal rule on the circle, evaluated once at 2n nodes; the n-node
    subsample gives the doubling error estimate.
    """
    orders = list(orders)
    fine = sample(f, spec.points(2 * spec.nodes))
    coarse = fine[::2]
    c_fine = _fft_coefficients(fine, spec.radius, orders)
    c_coarse = _fft_coefficients(coarse, spec.radius, orders)
    err = np.abs(c_fine - c_coarse)
    scale = np.max(np.abs(fine)) if fine.size else 0.0
    bound = config.contour_doubling_tol * max(scale, 1.0) * np.array(
        [spec.radius ** (-float(k)) for k in orders]).reshape((-1,) + (1,) * (fine.ndim - 1))
    if check and np.any(err > bound):
        raise ContourError(
            f"node doubling disagreement {np.max(err):.3g} exceeds tolerance; "
            "shrink the radius or move the contour away from singularities")
    if return_error:
        return c_fine, err
    return c_fine


def laurent_coefficient(f, spec: ContourSpec, k: int, **kw):
    return laurent_coefficients(f, spec, [k], **kw)[0]


def residue(f, center: complex, radius: float, nodes: int = DEFAULT.contour_nodes, **kw):
    return laurent_coefficient(f, ContourSpec(center, radius, nodes), -1, **kw)


def safe_radius(center: complex, others, cap: float = DEFAULT.contour_radius) -> float:
    """min(cap, half the distance to the nearest other singular point)."""
    dists = [abs(complex(o) - complex(center)) for o in others]
    dists = [d for d in dists if d > 0]
    return min([cap] + [0.5 * d for d in dists])


def _unwrapped_turns(values: np.ndarray) -> float:
    steps = np.angle(values[1:] / values[:-1])
    return float(np.sum(steps)) / (2 * np.pi), float(np.max(np.abs(steps)))


def winding_along(f, path, *, samples: int = 512, max_samples: int = 1 << 16,
                  config: NumericConfig = DEFAULT) -> int:
    """Winding number of f around 0 along the closed path t -> path(t), t in [0, 1].

    Sums argument increments (the integral of d log f) and refines the
    sampling until every increment is below pi/8.
    """
    n = samples
    while True:
        t = np.linspace(0.0, 1.0, n + 1)
        z = path(t)
        vals = sample(f, z)
        if vals.ndim > 1:
            raise ValueError("winding number needs a scalar function")
        mags = np.abs(vals)
        if not np.all(np.isfinite(vals)) or mags.min() < 1e-13 * mags.max():
            raise ContourError("function vanishes or blows up on the winding contour")
        turns, worst = _unwrapped_turns(vals)
        if worst < np.pi / 8:
            break
        if n >= max_samples:
            raise ContourError("winding contour could not be resolved")
        n *= 2
    nearest = round(turns)
    if abs(turns - nearest) > config.winding_tol:
        raise ContourError(f"winding integral {turns:.4f} is not close to an integer")
    return int(nearest)


def winding_number(f, center: complex, radius: float, **kw) -> int:
    return winding_along(f, lambda t: center + radius * np.exp(2j * np.pi * t), **kw)


def parallelogram_path(corner: complex, tau: complex):
    """Boundary of corner + [0,1] + [0,1] tau, counter-clockwise."""
    verts = np.array([corner, corner + 1, corner + 1 + tau, corner + tau, corner])

    def path(t):
        t = np.asarray(t, dtype=float)
        seg = np.minimum((t * 4).astype(int), 3)
        frac = t * 4 - seg
        return verts[seg] + frac * (verts[seg + 1] - verts[seg])

    return path


# -- linear algebra ---------------------------------------------------------

def numerical_rank(M, rtol: float = DEFAULT.rank_rtol) -> int:
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    if M.size == 0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[0] == 0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))


def controllability_matrix(A, C) -> np.ndarray:
    """[C, AC, ..., A^(n-1) C] for A n x n and C n x r."""
    A = np.asarray(A, dtype=complex)
    C = np.asarray(C, dtype=complex)
    n = A.shape[0]
    blocks, cur = [], C
    for _ in range(n):
        blocks.append(cur)
        cur = A @ cur
    return np.hstack(blocks) if blocks else np.zeros((0, 0), dtype=complex)


def observability_matrix(B, A) -> np.ndarray:
    """[B; BA; ...; B A^(n-1)] for B r x n and A n x n."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    n = A.shape[0]
    blocks, cur = [], B
    for _ in range(n):
        blocks.append(cur)
        cur = cur @ A
    return np.vstack(blocks) if blocks else np.zeros((0, 0), dtype=complex)


def nilpotency_index(A, tol: float = DEFAULT.nilpotent_tol) -> int | None:
    """Least n with ||A^n|| <= tol * max(||A||, 1)^n, or None if A is not nilpotent."""
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    size = A.shape[0]
    if size == 0:
        return 0
    norm = max(np.linalg.norm(A, 2), 1.0)
    P = np.eye(size, dtype=complex)
    for n in range(1, size + 1):
        P = P @ A
        if np.linalg.norm(P, 2) <= tol * norm**n:
            return n
    return None


def structure_ranks(A, B=None, C=None, rtol: float = DEFAULT.rank_rtol):
    """(controllability rank of (A, C) or observability rank of (B, A), nilpotency index)."""
    if (B is None) == (C is None):
        raise ValueError("pass exactly one of B (observability) or C (controllability)")
    K = controllability_matrix(A, C) if C is not None else observability_matrix(B, A)
    return numerical_rank(K, rtol), nilpotency_index(A)


def sylvester_residual(Api, Az, Cpi, Bz, S) -> float:
    R = Api @ S - S @ Az - Cpi @ Bz
    return float(np.linalg.norm(R)) if R.size else 0.0


def kernel_dimension(M, gap: float = DEFAULT.kernel_gap, side: str = "right") -> int:
    """Dimension of the right (or left) kernel of a square matrix by singular-value gap."""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    if side == "left":
        M = M.T
    sv = np.linalg.svd(M, compute_uv=False)
    ncols = M.shape[1]
    if sv.size == 0 or sv[0] == 0:
        return ncols
    rank = int(np.sum(sv > gap * sv[0]))
    return ncols - rank


def null_vector(M, side: str = "right") -> np.ndarray:
    """Unit vector for the smallest singular value (right: M v ~ 0, left: v M ~ 0)."""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    U, _, Vh = np.linalg.svd(M)
    if side == "right":
        return Vh[-1].conj()
    return U[:, -1].conj()
