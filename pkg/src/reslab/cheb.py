"""Chebyshev-Lobatto collocation utilities.

Nodes, differentiation matrices, and spectrally accurate antiderivatives on
[-1, 1], plus affine maps to arbitrary (possibly complex) segments.  Everything
here is dense numpy; segment sizes stay in the hundreds.
"""
from __future__ import annotations

import numpy as np


def lobatto_nodes(n: int) -> np.ndarray:
    """n+1 Chebyshev-Lobatto points in increasing order on [-1, 1]."""
    if n < 1:
        raise ValueError("need at least two nodes")
    return -np.cos(np.pi * np.arange(n + 1) / n)


def diffmat(n: int) -> np.ndarray:
    """Differentiation matrix on the nodes of lobatto_nodes(n).

    Standard Trefethen construction with the negative-sum trick on the
    diagonal, reordered for increasing nodes.
    """
    if n == 0:
        return np.zeros((1, 1))
    x = np.cos(np.pi * np.arange(n + 1) / n)  # decreasing, classic ordering
    c = np.ones(n + 1)
    c[0] = 2.0
    c[-1] = 2.0
    c *= (-1.0) ** np.arange(n + 1)
    X = np.tile(x, (n + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(n + 1))
    D -= np.diag(D.sum(axis=1))
    # reorder rows/cols for increasing nodes (still d/dx)
    J = np.arange(n, -1, -1)
    return D[np.ix_(J, J)]


_weights_cache: dict = {}


def lobatto_weights(n: int) -> np.ndarray:
    """Clenshaw-Curtis quadrature weights for lobatto_nodes(n) on [-1, 1].

    Exact for polynomials of degree n (the weights integrate the Chebyshev
    interpolant).  Computed by pushing the Chebyshev moments
    int T_k = 2/(1-k^2) (k even) through the transpose of the value-to
    coefficient map; cached per n.
    """
    if n == 0:
        return np.array([2.0])
    w = _weights_cache.get(n)
    if w is None:
        k = np.arange(n + 1)
        mom = np.zeros(n + 1)
        even = k % 2 == 0
        mom[even] = 2.0 / (1.0 - k[even] ** 2)
        C = np.empty((n + 1, n + 1))
        eye = np.eye(n + 1)
        for j in range(n + 1):
            C[:, j] = vals_to_coeffs(eye[:, j])
        w = C.T @ mom
        _weights_cache[n] = w
    return w.copy()


def vals_to_coeffs(v: np.ndarray) -> np.ndarray:
    """Chebyshev coefficients of the interpolant through values at
    lobatto_nodes(n) (increasing order).  Works for complex data."""
    v = np.asarray(v)
    n = v.shape[0] - 1
    if n == 0:
        return v.copy()
    # classic DCT-I via even extension; x_j = cos(pi j / n) needs decreasing order
    w = v[::-1]
    ext = np.concatenate([w, w[-2:0:-1]])
    coef = np.fft.fft(ext) / n
    a = coef[: n + 1].copy()
    a[0] *= 0.5
    a[-1] *= 0.5
    if np.isrealobj(v):
        a = a.real
    return a


def coeffs_to_vals(a: np.ndarray) -> np.ndarray:
    """Inverse of vals_to_coeffs."""
    a = np.asarray(a)
    n = a.shape[0] - 1
    x = lobatto_nodes(n) if n > 0 else np.array([0.0])
    return np.polynomial.chebyshev.chebval(x, a)


def antiderivative_vals(v: np.ndarray, halfwidth=1.0) -> np.ndarray:
    """Antiderivative of the Chebyshev interpolant of v, zero at the first
    (leftmost) node.

    `halfwidth` is the Jacobian d(physical)/d(reference) when the values live
    on an affine image of [-1, 1]; it may be complex for slanted segments.
    """
    a = vals_to_coeffs(np.asarray(v, dtype=complex))
    A = np.polynomial.chebyshev.chebint(a)
    x = lobatto_nodes(len(v) - 1)
    F = np.polynomial.chebyshev.chebval(x, A)
    return (F - F[0]) * halfwidth


class Segment:
    """Affine image of [-1,1]: t in [-1,1] -> z0 + halfwidth*(t+1).

    Carries nodes, the physical differentiation matrix, and quadrature-free
    cumulative integration.  Endpoints may be complex; `halfwidth` is half the
    (complex) displacement.
    """

    def __init__(self, z_start, z_end, n: int):
        self.z_start = complex(z_start)
        self.z_end = complex(z_end)
        self.n = n
        self.t = lobatto_nodes(n)
        self.halfwidth = 0.5 * (self.z_end - self.z_start)
        self.nodes = self.z_start + self.halfwidth * (self.t + 1.0)
        self._D = None

    @property
    def D(self) -> np.ndarray:
        """Differentiation matrix with respect to the physical coordinate."""
        if self._D is None:
            self._D = diffmat(self.n) / self.halfwidth
        return self._D

    @property
    def weights(self) -> np.ndarray:
        """Quadrature weights on the physical nodes (complex for slanted
        segments: they integrate along the segment)."""
        return lobatto_weights(self.n) * self.halfwidth

    def integrate_from_start(self, v: np.ndarray) -> np.ndarray:
        return antiderivative_vals(v, self.halfwidth)
