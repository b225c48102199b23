"""Hot theta-series kernels, compiled with numba when available.

Set ``ELLTRIV_DISABLE_NUMBA=1`` to force the pure-numpy implementations.
Both paths compute the same moment sums

    S_k(z) = sum_{n in shift + Z, |n - shift| <= N} n**k exp(pi i tau n**2 + 2 pi i n z)

for k = 0..kmax, which give theta, its derivatives and theta with
characteristics.
"""
from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("ELLTRIV_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None and not _DISABLE


def theta_moments_numpy(z, tau, shift, nterms, kmax):
    z = np.ascontiguousarray(z, dtype=np.complex128).ravel()
    n = np.arange(-nterms, nterms + 1, dtype=np.float64) + shift
    expo = 1j * np.pi * tau * n**2 + 2j * np.pi * np.multiply.outer(z, n)
    terms = np.exp(expo)
    powers = n[None, :] ** np.arange(kmax + 1, dtype=np.float64)[:, None]
    return terms @ powers.T.astype(np.complex128)


def _theta_moments_loop(z, tau, shift, nterms, kmax):
    # one exp per point: exp(2 pi i n z) advances by a constant factor in n
    width = 2 * nterms + 1
    nodes = np.empty(width)
    gauss = np.empty(width, dtype=np.complex128)
    for m in range(width):
        n = m - nterms + shift
        nodes[m] = n
        gauss[m] = np.exp(1j * np.pi * tau * n * n)
    out = np.zeros((z.shape[0], kmax + 1), dtype=np.complex128)
    two_pi_i = 2j * np.pi
    for i in range(z.shape[0]):
        step = np.exp(two_pi_i * z[i])
        wave = np.exp(two_pi_i * nodes[0] * z[i])
        for m in range(width):
            term = gauss[m] * wave
            p = 1.0
            for k in range(kmax + 1):
                out[i, k] += term * p
                p *= nodes[m]
            wave *= step
    return out


if HAVE_NUMBA:
    _theta_moments_jit = numba.njit(cache=True, nogil=True)(_theta_moments_loop)

    def theta_moments_numba(z, tau, shift, nterms, kmax):
        z = np.ascontiguousarray(z, dtype=np.complex128).ravel()
        return _theta_moments_jit(z, complex(tau), float(shift), int(nterms), int(kmax))
else:
    theta_moments_numba = None


def theta_moments(z, tau, shift, nterms, kmax):
    """Dispatch to the compiled kernel or the numpy fallback."""
    if HAVE_NUMBA:
        return theta_moments_numba(z, tau, shift, nterms, kmax)
    return theta_moments_numpy(z, tau, shift, nterms, kmax)
