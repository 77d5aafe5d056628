"""Block factorizations, bordered (Grushin) systems, and winding/multiplicity
calculus for holomorphic and finitely meromorphic matrix families."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla


@dataclass
class BlockOperator:
    """2x2 block matrix [[P11, P12], [P21, P22]] with invertible P11."""

    P11: np.ndarray
    P12: np.ndarray
    P21: np.ndarray
    P22: np.ndarray

    def full(self) -> np.ndarray:
        top = np.hstack([self.P11, self.P12])
        bot = np.hstack([self.P21, self.P22])
        return np.vstack([top, bot])


def schur_factor(B: BlockOperator):
    """Triangular factorization
        [[P11, P12], [P21, P22]] = [[I, 0], [P21 P11^-1, I]]
                                   @ [[P11, 0], [0, S]]
                                   @ [[I, P11^-1 P12], [0, I]]
    with S = P22 - P21 P11^-1 P12 the Schur complement.

    Returns (lower, diag, upper, S).
    """
    n1 = B.P11.shape[0]
    n2 = B.P22.shape[0]
    X = np.linalg.solve(B.P11, B.P12)  # P11^-1 P12
    Y = np.linalg.solve(B.P11.T, B.P21.T).T  # P21 P11^-1
    S = B.P22 - B.P21 @ X
    I1, I2 = np.eye(n1), np.eye(n2)
    Z12, Z21 = np.zeros((n1, n2)), np.zeros((n2, n1))
    lower = np.block([[I1, Z12], [Y, I2]])
    diag = np.block([[B.P11, Z12], [Z21, S]])
    upper = np.block([[I1, X], [Z21, I2]])
    return lower, diag, upper, S


def schur_identities(B: BlockOperator, atol: float = 1e-10) -> dict:
    """Verify the inverse-block identities: with E = full(B)^-1 in blocks,
    E22^-1 = P22 - P21 P11^-1 P12 and P11^-1 = E11 - E12 E22^-1 E21.

    Returns the residuals; raises if the full matrix or a needed block is
    singular beyond tolerance.
    """
    M = B.full()
    E = np.linalg.inv(M)
    n1 = B.P11.shape[0]
    E11, E12 = E[:n1, :n1], E[:n1, n1:]
    E21, E22 = E[n1:, :n1], E[n1:, n1:]
    S = B.P22 - B.P21 @ np.linalg.solve(B.P11, B.P12)
    r1 = np.linalg.norm(np.linalg.inv(E22) - S, 2)
    r2 = np.linalg.norm(np.linalg.inv(B.P11) - (E11 - E12 @ np.linalg.solve(E22, E21)), 2)
    scale = max(1.0, np.linalg.norm(M, 2))
    return {"schur_residual": r1 / scale, "inverse_residual": r2 / scale}


@dataclass
class GrushinSystem:
    """Bordered family z -> [[P(z), R_minus], [R_plus, 0]] built at a base point."""

    family: Callable[[complex], np.ndarray]
    R_plus: np.ndarray  # (N, dim)
    R_minus: np.ndarray  # (dim, N)
    z0: complex
    rank: int

    def bordered(self, z) -> np.ndarray:
        P = np.asarray(self.family(z), dtype=complex)
        N = self.rank
        Z = np.zeros((N, N), dtype=complex)
        return np.block([[P, self.R_minus], [self.R_plus, Z]])

    def e_minus_plus(self, z) -> np.ndarray:
        """Effective N x N block E_-+ (z): the lower-right block of the
        inverse of the bordered matrix."""
        M = self.bordered(z)
        dim = M.shape[0] - self.rank
        rhs = np.zeros((M.shape[0], self.rank), dtype=complex)
        rhs[dim:, :] = np.eye(self.rank)
        sol = np.linalg.solve(M, rhs)
        return sol[dim:, :]


def border(family: Callable[[complex], np.ndarray], z0, n_guess: int | None = None,
           svd_tol: float = 1e-8) -> GrushinSystem:
    """Border a matrix family at z0 using the singular directions of P(z0).

    The border rank is n_guess if given, else the number of singular values
    below svd_tol * ||P(z0)||.  R_plus collects the right singular vectors of
    the smallest singular values (rows, conjugated), R_minus the corresponding
    left singular vectors (columns), which makes the bordered matrix well
    conditioned at z0.
    """
    P0 = np.asarray(family(z0), dtype=complex)
    U, sv, Vh = np.linalg.svd(P0)
    if n_guess is None:
        n_guess = int(np.sum(sv < svd_tol * max(sv[0], 1e-300)))
    if n_guess == 0:
        raise ValueError("family is well conditioned at z0; nothing to border")
    N = n_guess
    R_plus = Vh[-N:, :]          # maps u -> (u | v_i)
    R_minus = U[:, -N:]          # maps u_- -> sum u_-(i) u_i
    return GrushinSystem(family=family, R_plus=R_plus, R_minus=R_minus,
                         z0=complex(z0), rank=N)


# ---------------------------------------------------------------------------
# winding numbers / multiplicities


def _log_winding(values: np.ndarray) -> float:
    """Total increment of log of a closed discrete loop of nonzero complex
    values, in units of 2 pi i.  Exact integer when increments stay < pi."""
    v = np.asarray(values, dtype=complex)
    ratios = v[np.arange(1, len(v) + 1) % len(v)] / v
    incr = np.log(ratios)
    return float(np.sum(incr.imag) / (2 * np.pi))


def circle_winding(f: Callable[[complex], complex], z0, radius: float,
                   n_nodes: int = 64, max_refine: int = 4) -> int:
    """Winding number of f around the circle |z - z0| = radius.

    Evaluates f on a uniform grid and sums principal-branch log increments;
    the grid is refined (doubled) until each increment is < pi/2.  Raises if
    the values pass too close to 0 relative to their neighbors.
    """
    for attempt in range(max_refine + 1):
        th = 2 * np.pi * np.arange(n_nodes) / n_nodes
        zs = z0 + radius * np.exp(1j * th)
        vals = np.asarray([f(z) for z in zs], dtype=complex)
        if np.any(vals == 0) or not np.all(np.isfinite(vals)):
            raise ArithmeticError("f vanishes or blows up on the contour")
        ratios = vals[np.arange(1, n_nodes + 1) % n_nodes] / vals
        if np.max(np.abs(np.angle(ratios))) < np.pi / 2:
            w = _log_winding(vals)
            if abs(w - round(w)) > 0.1:
                raise ArithmeticError(f"winding {w} is not close to an integer")
            return int(round(w))
        n_nodes *= 2
    raise ArithmeticError("could not resolve winding; a zero may sit on the contour")


def multiplicity_at(sys: GrushinSystem, z0, radius: float, n_nodes: int = 64) -> int:
    """Algebraic multiplicity of the characteristic point z0 via the trace
    formula: (1/2 pi i) contour-int of tr(E_-+^-1 dE_-+) equals
    (1/2 pi i) contour-int of tr(P^-1 dP); both are evaluated and compared.

    The trace integrals are computed with spectral differentiation of the
    analytic samples on a 64-point circle (trapezoid rule, exactness for
    trigonometric polynomials); a result farther than 0.1 from an integer
    (or a mismatch between the two routes) raises.
    """
    th = 2 * np.pi * np.arange(n_nodes) / n_nodes
    zs = z0 + radius * np.exp(1j * th)

    def trace_integral(mats):
        mats = np.asarray(mats)
        dmats = _spectral_dz(mats, radius, th)
        vals = np.array([np.trace(np.linalg.solve(mats[k], dmats[k])) for k in range(n_nodes)])
        dz = 1j * radius * np.exp(1j * th)
        integral = np.sum(vals * dz) * (2 * np.pi / n_nodes) / (2j * np.pi)
        return integral

    I_eff = trace_integral([sys.e_minus_plus(z) for z in zs])
    I_fam = trace_integral([np.asarray(sys.family(z), dtype=complex) for z in zs])
    for name, val in (("E_-+", I_eff), ("P", I_fam)):
        if abs(val.imag) > 0.05 or abs(val.real - round(val.real)) > 0.1:
            raise ArithmeticError(f"trace integral over {name} = {val} not close to an integer; "
                                  "contour likely passes near a characteristic point")
    m_eff, m_fam = int(round(I_eff.real)), int(round(I_fam.real))
    if m_eff != m_fam:
        raise ArithmeticError(f"trace integrals disagree: {m_eff} vs {m_fam}")
    return m_eff


def _spectral_dz(mats: np.ndarray, radius: float, th: np.ndarray) -> np.ndarray:
    """d/dz of matrix samples on the circle z = z0 + r e^{i th} via FFT in th."""
    n = len(th)
    k = np.fft.fftfreq(n, d=1.0 / n)  # ..., -2, -1, 0, 1, 2, ...
    F = np.fft.fft(mats, axis=0)
    dmats_dth = np.fft.ifft(1j * k[:, None, None] * F, axis=0)
    dz_dth = (1j * radius * np.exp(1j * th))[:, None, None]
    return dmats_dth / dz_dth


def meromorphic_multiplicity(poles: list, holo: Callable[[complex], np.ndarray],
                             z0, radius: float, n_nodes: int = 128) -> int:
    """Signed zero count (zeros minus poles, with multiplicity) of
    det(P(z)) around z0, for a finitely meromorphic family

        P(z) = holo(z) + sum_p sum_j P_{p,j} (z - z_p)^{-j}

    given as `poles = [(z_p, [P_{p,1}, P_{p,2}, ...]), ...]`.
    """

    def family(z):
        M = np.asarray(holo(z), dtype=complex).copy()
        for z_p, coeffs in poles:
            for j, Pj in enumerate(coeffs, start=1):
                M += np.asarray(Pj, dtype=complex) / (z - z_p) ** j
        return M

    return circle_winding(lambda z: np.linalg.det(family(z)), z0, radius, n_nodes=n_nodes)


# ---------------------------------------------------------------------------
# log-determinant derivatives


@dataclass
class LogDetDerivative:
    """Samples of D_j(z) = tr( d^{j-1}/dz^{j-1} (P^-1 P') ) on a grid along a
    segment in the z-plane."""

    grid: np.ndarray
    order: int
    values: np.ndarray  # shape (order, len(grid)); values[j-1] = D_j samples


def dz_derivatives(func: Callable[[complex], np.ndarray], z, order: int,
                   rho: float = 0.02, n: int = 32) -> list:
    """Derivatives d^m f/dz^m, m = 1..order, of an analytic (matrix- or
    scalar-valued) function via a small-circle FFT stencil: spectrally
    accurate differencing of analytic evaluations."""
    th = 2 * np.pi * np.arange(n) / n
    samples = np.asarray([np.asarray(func(z + rho * np.exp(1j * t)), dtype=complex)
                          for t in th])
    F = np.fft.fft(samples, axis=0) / n  # Taylor coefficients a_m rho^m (m < n)
    from math import factorial

    return [np.asarray(F[m] * factorial(m) / rho**m) for m in range(1, order + 1)]


def logdet_trace(family: Callable[[complex], np.ndarray], z, rho: float = 0.02) -> complex:
    """D_1(z) = tr(P(z)^-1 P'(z))."""
    P = np.asarray(family(z), dtype=complex)
    (dP,) = dz_derivatives(family, z, 1, rho=rho)
    return complex(np.trace(np.linalg.solve(P, dP)))


def logdet_derivative_grid(family: Callable[[complex], np.ndarray], grid: np.ndarray,
                           order: int, rho: float = 0.02) -> LogDetDerivative:
    """Sample D_1 = tr(P^-1 P') on the grid and the higher derivatives
    D_{j+1} = d/dz D_j, all via circle-stencil differencing of analytic
    evaluations (the grid itself is not used for differencing, so the samples
    do not lose accuracy with grid spacing)."""
    grid = np.asarray(grid, dtype=complex)
    if order < 1:
        raise ValueError("order must be >= 1")
    D1 = np.array([logdet_trace(family, z, rho=rho) for z in grid])
    values = [D1]
    if order > 1:
        higher = [dz_derivatives(lambda w: logdet_trace(family, w, rho=rho), z,
                                 order - 1, rho=rho) for z in grid]
        for j in range(order - 1):
            values.append(np.array([higher[k][j] for k in range(len(grid))]))
    return LogDetDerivative(grid=grid, order=order, values=np.asarray(values))


def logdet_via_traces(family: Callable[[complex], np.ndarray], grid: np.ndarray,
                      order: int = 1, n_anchors: int | None = None,
                      rho: float = 0.02) -> np.ndarray:
    """Reconstruct log|det P| on the grid by integrating D_order back `order`
    times; the polynomial ambiguity (degree order-1) is fixed by least-squares
    matching of direct log det at anchor points.

    Returns the reconstructed log|det| samples.
    """
    grid = np.asarray(grid, dtype=complex)
    ld = logdet_derivative_grid(family, grid, order, rho=rho)
    f = ld.values[order - 1]
    for _ in range(order):
        f = _cumsimp(grid, f)
    # fix polynomial of degree order-1 at anchors
    if n_anchors is None:
        n_anchors = max(order, 2)
    anchors = np.linspace(0, len(grid) - 1, n_anchors).astype(int)
    direct = np.array([_logabsdet(family(grid[k])) for k in anchors])
    # poly in (z - z_mid) with degree order-1, real coefficients on Re part
    zm = grid[len(grid) // 2]
    A = np.vander((grid[anchors] - zm), order, increasing=True)
    # match real parts: Re(f + A c) = direct
    Ar = np.hstack([A.real, -A.imag])
    rhs = direct - f[anchors].real
    coef, *_ = np.linalg.lstsq(Ar, rhs, rcond=None)
    c = coef[:order] + 1j * coef[order:]
    corr = np.vander((grid - zm), order, increasing=True) @ c
    return (f + corr).real


def _cumsimp(grid, vals):
    """Cumulative integral along a straight segment grid, 4th order.

    The grid is an affine image of a real parameter; integrate in the
    parameter with cumulative Simpson and scale by the complex direction.
    """
    from scipy.integrate import cumulative_simpson

    grid = np.asarray(grid, dtype=complex)
    direction = (grid[-1] - grid[0]) / (abs(grid[-1] - grid[0]))
    t = np.abs(grid - grid[0])
    vals = np.asarray(vals, dtype=complex)
    out_r = cumulative_simpson(vals.real, x=t, initial=0.0)
    out_i = cumulative_simpson(vals.imag, x=t, initial=0.0)
    return (out_r + 1j * out_i) * direction


def _logabsdet(M):
    sign, logdet = np.linalg.slogdet(np.asarray(M, dtype=complex))
    return float(logdet)


def winding_additivity(fam_a: Callable[[complex], np.ndarray],
                       fam_b: Callable[[complex], np.ndarray],
                       z0, radius: float) -> tuple[int, int, int]:
    """Windings of det A, det B, det(AB) around a circle; multiplicativity of
    determinants makes the third the exact sum of the first two."""
    wa = circle_winding(lambda z: np.linalg.det(fam_a(z)), z0, radius)
    wb = circle_winding(lambda z: np.linalg.det(fam_b(z)), z0, radius)
    wab = circle_winding(lambda z: np.linalg.det(fam_a(z) @ fam_b(z)), z0, radius)
    return wa, wb, wab


def det_winding(family: Callable[[complex], np.ndarray], z0, radius: float,
                n_nodes: int = 64) -> int:
    """Winding of det P(z) around a circle (zeros minus poles inside)."""
    return circle_winding(lambda z: np.linalg.det(np.asarray(family(z), dtype=complex)),
                          z0, radius, n_nodes=n_nodes)
