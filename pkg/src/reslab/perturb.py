"""Random multiplicative perturbations of the potential.

The perturbation has the shape delta * Theta * q: a smooth interior weight
Theta comparable to a power of the boundary distance, times a random potential
q drawn from the span of low-frequency eigenmodes of a reference operator on a
circle surrounding the obstacle, with a coefficient vector confined to a ball.

Besides the sampling machinery this module carries the two pieces of linear
algebra that make such perturbations effective against spectral degeneracies:

* evaluation-point selection ("Gramian selection"): given functions
  e_1..e_N on a region Omega, pick points a_1..a_N so that the matrix
  M_{jk} = sum_nu e_j(a_nu) e_k(a_nu) has all its singular values bounded
  below in terms of the eigenvalues of the Gramian of the e_j;
* a matrix-scale boosting iteration that repeatedly adds a small admissible
  diagonal perturbation to push the smallest singular values of an operator
  proxy above a shrinking threshold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from .cheb import Segment, vals_to_coeffs


# ---------------------------------------------------------------------------
# spectral basis on a circle
# ---------------------------------------------------------------------------

@dataclass
class SpectralBasis:
    """Orthonormal trigonometric modes on a circle of given circumference.

    The modes are the eigenfunctions of h^2 * (-d^2/dx^2) with eigenvalue
    mu_k^2, 0 < mu_k <= cutoff; `functions` holds their values on a uniform
    periodic grid fine enough that products of two basis functions are
    integrated exactly by the trapezoid rule.
    """

    start: float
    length: float
    h: float
    cutoff: float
    grid: np.ndarray
    functions: np.ndarray  # (dim, grid size)
    mu: np.ndarray  # (dim,) values h * frequency, ascending in pairs
    frequencies: np.ndarray  # (dim,) positive angular frequencies

    @property
    def dim(self) -> int:
        return len(self.mu)

    @property
    def node_weight(self) -> float:
        """Quadrature weight of one grid node (trapezoid on the circle)."""
        return self.length / len(self.grid)

    def synthesize(self, alpha: np.ndarray) -> np.ndarray:
        """Grid values of sum_k alpha_k epsilon_k."""
        alpha = np.asarray(alpha)
        if alpha.shape != (self.dim,):
            raise ValueError(f"alpha must have shape ({self.dim},)")
        return alpha @ self.functions

    def project(self, values: np.ndarray, cutoff: float | None = None) -> np.ndarray:
        """Coefficients <epsilon_k, values> for modes with mu_k <= cutoff
        (zeros elsewhere)."""
        alpha = self.node_weight * (self.functions @ np.asarray(values))
        if cutoff is not None:
            alpha = np.where(self.mu <= cutoff * (1.0 + 1e-12), alpha, 0.0)
        return alpha

    def sobolev_norm(self, values: np.ndarray, order: float,
                     h: float | None = None) -> float:
        """Discrete Sobolev norm (1 + (h xi)^2)^(order/2) on the circle.

        Computed from the FFT of the grid values; `order` may be negative.
        """
        h = self.h if h is None else h
        f = np.asarray(values, dtype=complex)
        m = len(f)
        if m != len(self.grid):
            raise ValueError("values must live on the basis grid")
        fhat = np.fft.fft(f) / m
        xi = 2.0 * np.pi * np.fft.fftfreq(m, d=self.length / m)
        w = (1.0 + (h * xi) ** 2) ** order
        return float(np.sqrt(self.length * np.sum(w * np.abs(fhat) ** 2)))


def build_basis(L: float, h: float, domain: tuple[float, float] = (-np.pi, np.pi),
                grid_points: int | None = None) -> SpectralBasis:
    """All circle modes with 0 < h * frequency <= L, sampled on a uniform grid.

    The default grid has at least 4 points per highest retained wavelength
    twice over, so pairwise products of basis functions sit strictly below the
    Nyquist frequency and the trapezoid rule integrates them exactly.
    """
    if L <= 0 or h <= 0:
        raise ValueError("cutoff and h must be positive")
    start, end = float(domain[0]), float(domain[1])
    length = end - start
    if length <= 0:
        raise ValueError("domain must have positive length")
    w0 = 2.0 * np.pi / length
    kmax = int(np.floor(L / (h * w0) * (1.0 + 1e-12)))
    if kmax < 1:
        raise ValueError(
            f"cutoff L={L} keeps no modes (first frequency is {h * w0:g})")
    m = grid_points if grid_points is not None else max(64, 4 * kmax + 4)
    grid = start + (length / m) * np.arange(m)
    k = np.arange(1, kmax + 1)
    omega = w0 * k
    amp = np.sqrt(2.0 / length)
    phases = np.outer(omega, grid - start)
    functions = np.empty((2 * kmax, m))
    functions[0::2] = amp * np.cos(phases)
    functions[1::2] = amp * np.sin(phases)
    mu = h * np.repeat(omega, 2)
    freqs = np.repeat(omega, 2)
    return SpectralBasis(start=start, length=length, h=h, cutoff=float(L),
                         grid=grid, functions=functions, mu=mu,
                         frequencies=freqs)


# ---------------------------------------------------------------------------
# interior weight
# ---------------------------------------------------------------------------

def theta_weight(obstacle: tuple[float, float], v0: int,
                 grid: np.ndarray) -> np.ndarray:
    """Smooth interior weight comparable to dist(x, boundary)^v0.

    Uses the p-norm soft minimum of the two endpoint distances u, v with
    p = v0:  Theta = (u v)^v0 / (u^v0 + v^v0).  The ratio to min(u, v)^v0 is
    max^p / (min^p + max^p), which lies in [1/2, 1] for every v0, so the
    two-sided comparability holds with explicit constants.  Extended by zero
    outside the obstacle.
    """
    if v0 != int(v0) or v0 < 1:
        raise ValueError(f"v0 must be a positive integer, got {v0}")
    p = int(v0)
    a, b = float(obstacle[0]), float(obstacle[1])
    if b <= a:
        raise ValueError("obstacle must be a nondegenerate interval")
    x = np.asarray(grid, dtype=float)
    u = x - a
    v = b - x
    inside = (u > 0) & (v > 0)
    out = np.zeros_like(x)
    us = np.where(inside, u, 1.0)
    vs = np.where(inside, v, 1.0)
    out[inside] = ((us ** p) * (vs ** p) / (us ** p + vs ** p))[inside]
    return out


# ---------------------------------------------------------------------------
# random draws
# ---------------------------------------------------------------------------

@dataclass
class PerturbationDraw:
    """One realization of the random potential and (optionally) its weighted,
    scaled version delta * Theta * q."""

    basis: SpectralBasis
    alpha: np.ndarray
    q: np.ndarray
    theta_weight: np.ndarray | None = None
    realized: np.ndarray | None = None
    delta: float = 0.0
    v0: int | None = None
    seed: object = None


def _ball_point(rng: np.random.Generator, dim: int, radius: float) -> np.ndarray:
    """One point uniformly distributed in the closed ball of given radius."""
    if radius == 0.0:
        return np.zeros(dim)
    g = rng.standard_normal(dim)
    nrm = np.linalg.norm(g)
    if nrm == 0.0:  # pragma: no cover - probability zero
        return np.zeros(dim)
    r = radius * rng.random() ** (1.0 / dim)
    return (r / nrm) * g


def _check_density_gradient(phi: Callable[[np.ndarray], float], dim: int,
                            radius: float, rng: np.random.Generator) -> None:
    """Require finite gradients of the log-density at a few probe points."""
    step = 1e-6 * max(radius, 1.0)
    probes = [np.zeros(dim)] + [_ball_point(rng, dim, 0.5 * radius)
                                for _ in range(2)]
    for p in probes:
        for j in range(min(dim, 4)):
            e = np.zeros(dim)
            e[j] = step
            g = (phi(p + e) - phi(p - e)) / (2.0 * step)
            if not np.isfinite(g):
                raise ValueError(
                    "log-density gradient is not finite near the ball")


def sample_draw(basis: SpectralBasis, R: float, rng_seed=0,
                distribution: tuple[Callable, float] | None = None, *,
                obstacle: tuple[float, float] | None = None, v0: int = 1,
                delta: float = 0.0, max_tries: int = 100000) -> PerturbationDraw:
    """Draw a random admissible potential with coefficients in the R-ball.

    By default the coefficient vector is uniform on the ball.  A non-flat
    log-density can be supplied as ``distribution=(phi, phi_max)`` with
    ``phi_max >= sup phi`` on the ball; it is realized by rejection against
    the uniform draw after a finite-gradient sanity check.  With `obstacle`
    given, the draw also carries the interior weight and the realized
    perturbation delta * Theta * q on the basis grid.
    """
    if R < 0:
        raise ValueError("ball radius must be nonnegative")
    rng = np.random.default_rng(rng_seed)
    if distribution is None:
        alpha = _ball_point(rng, basis.dim, R)
    else:
        phi, phi_max = distribution
        _check_density_gradient(phi, basis.dim, R, np.random.default_rng(0))
        alpha = None
        for _ in range(max_tries):
            cand = _ball_point(rng, basis.dim, R)
            if math.log(rng.random() + 1e-300) <= phi(cand) - phi_max:
                alpha = cand
                break
        if alpha is None:
            raise RuntimeError(
                "rejection sampling failed; is phi_max a valid upper bound?")
    q = basis.synthesize(alpha)
    theta = realized = None
    if obstacle is not None:
        theta = theta_weight(obstacle, v0, basis.grid)
        realized = delta * theta * q
    return PerturbationDraw(basis=basis, alpha=alpha, q=q, theta_weight=theta,
                            realized=realized, delta=delta,
                            v0=v0 if obstacle is not None else None,
                            seed=rng_seed)


def draw_streams(master_seed: int, n_workers: int) -> list[np.random.Generator]:
    """Independent per-worker generators derived from one master seed."""
    seq = np.random.SeedSequence(master_seed)
    return [np.random.default_rng(s) for s in seq.spawn(n_workers)]


# ---------------------------------------------------------------------------
# Gramian point selection
# ---------------------------------------------------------------------------

@dataclass
class GramianSelection:
    """Evaluation points for a family of functions, with the certificates.

    `energies` holds E_j = eps_1 + ... + eps_{N+1-j} (partial sums of the
    ascending Gramian eigenvalues), `singular_values` the descending spectrum
    of the point-evaluation matrix M.
    """

    omega: tuple[tuple[float, float], ...]
    gram: np.ndarray
    eps_sorted: np.ndarray
    points: np.ndarray
    M: np.ndarray
    energies: np.ndarray
    singular_values: np.ndarray
    vol: float
    candidates_used: int


def _selection_bounds_ok(s: np.ndarray, energies: np.ndarray, vol: float,
                         slack: float = 1e-9) -> bool:
    """Check s_1 >= (prod E_j)^(1/N) / vol and the tail chain
    s_k >= s_1 * (prod_j E_j / (s_1 vol))^(1/(N-k+1)) in log space."""
    N = len(s)
    with np.errstate(divide="ignore"):
        log_s = np.log(s)
        log_E = np.log(energies)
    sum_log_E = log_E.sum()
    log_vol = math.log(vol)
    rhs1 = sum_log_E / N - log_vol
    if not log_s[0] >= rhs1 - slack:
        return False
    for k in range(1, N + 1):
        rhs = log_s[0] + (sum_log_E - N * (log_s[0] + log_vol)) / (N - k + 1)
        if not log_s[k - 1] >= rhs - slack:
            return False
    return True


def gramian_select(funcs: Sequence[Callable[[np.ndarray], np.ndarray]],
                   omega, *, n_candidates: int | None = None,
                   quad_points: int | None = None,
                   refine_factor: int = 4) -> GramianSelection:
    """Choose evaluation points a_1..a_N for the functions e_1..e_N on omega.

    The points are the greedy maximal-volume rows (column-pivoted QR) of the
    evaluation matrix over a candidate grid that always contains the point of
    largest sum_j e_j(x)^2; this guarantees the leading bound
    s_1 * vol >= (E_1 ... E_N)^(1/N) up to roundoff, and in practice the full
    chain of lower bounds on s_k.  The bounds are verified on every call; a
    failure triggers one retry on a `refine_factor` times finer candidate
    grid, then a hard error.

    `omega` is one (lo, hi) interval or a sequence of disjoint ones.
    """
    funcs = list(funcs)
    N = len(funcs)
    if N == 0:
        raise ValueError("need at least one function")
    if np.isscalar(omega[0]):
        omega = (tuple(omega),)
    intervals = tuple((float(lo), float(hi)) for lo, hi in omega)
    lengths = np.array([hi - lo for lo, hi in intervals])
    if np.any(lengths <= 0):
        raise ValueError("omega intervals must have positive length")
    vol = float(lengths.sum())

    # quadrature grid (midpoint rule per interval, proportional allocation)
    total = quad_points if quad_points is not None else max(2000, 200 * N)
    xq_parts, wq_parts = [], []
    for (lo, hi), ln in zip(intervals, lengths):
        ni = max(31, int(round(total * ln / vol)))
        step = ln / ni
        xq_parts.append(lo + step * (np.arange(ni) + 0.5))
        wq_parts.append(np.full(ni, step))
    xq = np.concatenate(xq_parts)
    wq = np.concatenate(wq_parts)

    vals = np.stack([np.asarray(f(xq), dtype=float) for f in funcs])
    gram = (vals * wq) @ vals.T
    gram = 0.5 * (gram + gram.T)
    eps = np.clip(np.linalg.eigvalsh(gram), 0.0, None)
    energies = np.array([eps[: N + 1 - j].sum() for j in range(1, N + 1)])

    row_norm_sq = np.sum(vals ** 2, axis=0)
    peak = int(np.argmax(row_norm_sq))

    nc = n_candidates if n_candidates is not None else 50 * N
    last_error = None
    for attempt in range(2):
        take = min(len(xq), max(nc, N))
        cand = np.unique(np.concatenate(
            [np.linspace(0, len(xq) - 1, take).astype(int), [peak]]))
        _, _, piv = sla.qr(vals[:, cand], pivoting=True)
        chosen = cand[piv[:N]]
        points = xq[chosen]
        W = vals[:, chosen].T  # rows: points, cols: functions
        M = W.T @ W
        M = 0.5 * (M + M.T)
        s = np.clip(np.linalg.eigvalsh(M), 0.0, None)[::-1]
        if _selection_bounds_ok(s, energies, vol):
            return GramianSelection(omega=intervals, gram=gram,
                                    eps_sorted=eps, points=points, M=M,
                                    energies=energies, singular_values=s,
                                    vol=vol, candidates_used=len(cand))
        last_error = (s.copy(), points.copy())
        nc *= refine_factor
    raise RuntimeError(
        "point selection failed the singular-value guarantee even after "
        f"refinement (s = {last_error[0]})")


# ---------------------------------------------------------------------------
# point masses as admissible potentials
# ---------------------------------------------------------------------------

def decompose_point_masses(sel: GramianSelection, basis: SpectralBasis,
                           L: float | None = None, *,
                           obstacle: tuple[float, float], v0: int, s: float,
                           mollify_width: float | None = None,
                           leak_tol: float = 1e-8):
    """Write Theta^{-1} * (sum of point masses at sel.points) as q + r with q
    in the span of the basis modes below L.

    The point masses are mollified to Gaussians of grid-scale width before
    projection (a discrete pairing with a true delta is meaningless on a
    grid).  Returns ``(draw, remainder_norm)`` where `draw` carries the
    coefficients and grid values of q and `remainder_norm` is the discrete
    H^{-s} norm of r.  Raises if the mollified masses leak outside the
    obstacle or if the remainder dominates q (cutoff too small).
    """
    L = basis.cutoff if L is None else float(L)
    if L > basis.cutoff * (1.0 + 1e-12):
        raise ValueError("L exceeds the cutoff the basis was built with")
    theta = theta_weight(obstacle, v0, basis.grid)
    m = len(basis.grid)
    dx = basis.node_weight
    sigma = 2.0 * dx if mollify_width is None else float(mollify_width)

    x = basis.grid
    a, b = obstacle
    inside = (x > a) & (x < b)
    target = np.zeros(m)
    for pt in np.atleast_1d(sel.points):
        d = (x - pt + 0.5 * basis.length) % basis.length - 0.5 * basis.length
        g = np.exp(-0.5 * (d / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))
        leak = dx * g[~inside].sum()
        if leak > leak_tol:
            raise ValueError(
                f"mollified point mass at {pt:g} leaks {leak:.2e} outside")
        target[inside] += g[inside] / theta[inside]

    alpha = basis.project(target, cutoff=L)
    q = basis.synthesize(alpha)
    r = target - q
    r_norm = basis.sobolev_norm(r, -s)
    q_norm = basis.sobolev_norm(q, -s)
    if r_norm > q_norm:
        raise ValueError(
            f"remainder ({r_norm:.3e}) dominates the projected part "
            f"({q_norm:.3e}): cutoff L={L:g} is too small")
    draw = PerturbationDraw(basis=basis, alpha=alpha, q=q, theta_weight=theta,
                            realized=None, delta=0.0, v0=v0)
    return draw, r_norm


def perturbation_norm_report(draw: PerturbationDraw, s_tilde: float) -> float:
    """Discrete Sobolev norm of the realized perturbation W = delta Theta q.

    Valid for smoothness orders strictly between 1/2 and v0 + 1/2 (the range
    where the weight itself has that much Sobolev regularity).
    """
    if draw.realized is None or draw.v0 is None:
        raise ValueError("draw carries no realized perturbation")
    if not 0.5 < s_tilde < draw.v0 + 0.5:
        raise ValueError(
            f"s_tilde = {s_tilde} outside (1/2, v0 + 1/2) = "
            f"(0.5, {draw.v0 + 0.5})")
    return draw.basis.sobolev_norm(draw.realized, s_tilde)


# ---------------------------------------------------------------------------
# singular-value boosting (matrix scale)
# ---------------------------------------------------------------------------

def _rank_one_alpha(basis: SpectralBasis, f_vec: np.ndarray,
                    e_vec: np.ndarray, R: float) -> np.ndarray:
    """Real coefficient vector of norm R maximizing |f^* diag(q) e| for
    q = synthesize(alpha).

    The functional is alpha . c with c_k = sum_x conj(f)_x e_x eps_k(x); the
    best real alpha aligns with Re(e^{i phi} c) for the phase maximizing its
    norm, which has the closed form phi = -arg(sum c_k^2)/2.
    """
    c = basis.functions @ (np.conj(f_vec) * e_vec)
    s2 = np.sum(c * c)
    phi = -0.5 * np.angle(s2) if s2 != 0 else 0.0
    direction = np.real(np.exp(1j * phi) * c)
    nrm = np.linalg.norm(direction)
    if nrm == 0.0:
        return np.zeros(basis.dim)
    return (R / nrm) * direction


def boost_singular_values(A: np.ndarray, basis: SpectralBasis, tau0: float,
                          max_iters: int | None = None, *,
                          target: float | None = None, shrink: float = 0.1,
                          tilde_theta: float = 0.25, n_candidates: int = 8,
                          seed: int = 0, R: float = 1.0,
                          stall_limit: int = 3):
    """Push the smallest singular values of A above a shrinking threshold by
    adding small admissible diagonal perturbations.

    Each round: count the singular values below the current threshold, build
    the first-order interaction block M_{jk} = f_j^* diag(q) e_k between the
    corresponding left/right singular vectors for a pool of admissible q
    (random ball draws plus the closed-form rank-one optimizers for each
    singular pair), keep the q whose block is least degenerate, and add
    delta * diag(q) with delta = threshold / (2 max|q|) so the large singular
    values move by at most half a threshold.  The threshold then drops
    geometrically, clamped so that at most a (1 - tilde_theta) fraction of the
    previous small count remains below it (the new threshold sits under the
    values the boost has already lifted), and never below `target`.

    Returns ``(boosted matrix, history)`` with one ``(iteration, n_small,
    t1)`` record per round.  Raises after `stall_limit` rounds without any
    improvement of t1.
    """
    A = np.asarray(A)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("A must be square")
    if len(basis.grid) != n:
        raise ValueError(
            f"basis grid ({len(basis.grid)}) must match A ({n})")
    if tau0 <= 0:
        raise ValueError("tau0 must be positive")
    h = basis.h
    if target is None:
        target = tau0 * h ** math.log(1.0 / h) if h < 1.0 else tau0
    if max_iters is None:
        max_iters = max(8, int(math.ceil(3 * math.log(1.0 / h)))) if h < 1.0 else 8

    rng = np.random.default_rng(seed)
    Acur = np.array(A, dtype=complex, copy=True)
    history: list[tuple[int, int, float]] = []
    tau_cur = float(tau0)
    best_t1 = -np.inf
    stall = 0
    prev_small = None
    for it in range(max_iters):
        U, sv, Vh = sla.svd(Acur)
        t = sv[::-1]
        if t[0] >= target:
            history.append((it, int(np.sum(t < tau_cur)), float(t[0])))
            return Acur, history
        if prev_small is not None:
            allowed = int((1.0 - tilde_theta) * prev_small)
            if int(np.sum(t < tau_cur)) > allowed:
                tau_cur = max(target, t[allowed] * (1.0 - 1e-9))
        n_small = int(np.sum(t < tau_cur))
        history.append((it, n_small, float(t[0])))
        prev_small = n_small
        if t[0] > best_t1 * (1.0 + 1e-12):
            best_t1 = t[0]
            stall = 0
        else:
            stall += 1
            if stall >= stall_limit:
                raise RuntimeError(
                    f"no singular-value progress over {stall_limit} rounds "
                    f"(t1 stuck near {best_t1:.3e})")
        cols = np.arange(n - 1, n - 1 - n_small, -1)  # ascending t
        e = Vh.conj().T[:, cols]
        f = U[:, cols]
        pool = [basis.synthesize(_ball_point(rng, basis.dim, R))
                for _ in range(n_candidates)]
        pool.extend(basis.synthesize(_rank_one_alpha(basis, f[:, j], e[:, j], R))
                    for j in range(n_small))
        best_q, best_score = None, -1.0
        for qc in pool:
            block = f.conj().T @ (qc[:, None] * e)
            score = sla.svdvals(block)[-1]
            if score > best_score:
                best_score, best_q = score, qc
        qmax = np.max(np.abs(best_q))
        if qmax > 0:
            Acur[np.diag_indices(n)] += (tau_cur / (2.0 * qmax)) * best_q
        tau_cur = max(tau_cur * shrink, target)
    U, sv, _ = sla.svd(Acur)
    t = sv[::-1]
    history.append((max_iters, int(np.sum(t < tau_cur)), float(t[0])))
    return Acur, history


# ---------------------------------------------------------------------------
# small singular subspace of the outgoing operator
# ---------------------------------------------------------------------------

@dataclass
class OutgoingSubspace:
    """Singular values <= mu of the outgoing realization of the operator on
    the obstacle, with L2-normalized singular functions on collocation nodes.

    The identification of this discrete subspace with the true spectral
    subspace of the adjoint-square is numerical, not proven; treat the
    functions as measured data.
    """

    segment: Segment
    weights: np.ndarray
    t: np.ndarray  # ascending, entries <= mu
    functions: np.ndarray  # (len(t), nodes)
    t_all: np.ndarray

    def band_mass(self, k: int, h: float, fine: int = 400) -> float:
        """L2 norm of the k-th function over the pair of boundary bands at
        distance (h, 2h] from the obstacle boundary."""
        u = self.functions[k]
        coef = vals_to_coeffs(np.asarray(u, dtype=complex))
        seg = self.segment
        a = seg.z_start.real
        b = seg.z_end.real
        total = 0.0
        for lo, hi in ((a + h, a + 2 * h), (b - 2 * h, b - h)):
            xs = np.linspace(lo, hi, fine)
            ts = (xs - seg.z_start.real) / seg.halfwidth.real - 1.0
            vals = np.polynomial.chebyshev.chebval(ts, coef)
            total += np.trapezoid(np.abs(vals) ** 2, xs)
        return math.sqrt(total)


def outgoing_small_subspace(V: Callable[[np.ndarray], np.ndarray], h: float,
                            z: complex, obstacle: tuple[float, float],
                            mu: float, nn: int = 160) -> OutgoingSubspace:
    """Small singular values and functions of the obstacle operator with
    outgoing (radiation) boundary conditions at energy z.

    Collocation on one Chebyshev segment over the obstacle; the two boundary
    rows h u' = -+ i sqrt(z) u are eliminated exactly, and the singular value
    problem is posed in the L2 geometry induced by the quadrature weights.
    """
    a, b = float(obstacle[0]), float(obstacle[1])
    seg = Segment(a, b, nn)
    x = seg.nodes.real
    D = seg.D.real
    P = -h * h * (D @ D) + np.diag(V(x) - z + 0j)
    sq = np.sqrt(complex(z))
    bc_l = (h * D[0, :]).astype(complex)
    bc_l[0] += 1j * sq
    bc_r = (h * D[-1, :]).astype(complex)
    bc_r[-1] -= 1j * sq
    bnd = [0, nn]
    interior = np.arange(1, nn)
    Bbb = np.array([[bc_l[0], bc_l[nn]], [bc_r[0], bc_r[nn]]])
    Bbi = np.vstack([bc_l[interior], bc_r[interior]])
    X = -np.linalg.solve(Bbb, Bbi)  # boundary values from interior values
    At = P[np.ix_(interior, interior)] + P[np.ix_(interior, bnd)] @ X

    w = seg.weights.real
    wi = w[1:-1]
    sw = np.sqrt(wi)
    S = (sw[:, None] * At) / sw[None, :]
    U, sv, Vh = sla.svd(S)
    t_all = sv[::-1]
    n_keep = int(np.sum(t_all <= mu))
    funcs = np.empty((n_keep, nn + 1), dtype=complex)
    for j in range(n_keep):
        v = Vh.conj().T[:, nn - 2 - j]  # ascending t -> last svd columns
        u_i = v / sw
        u = np.empty(nn + 1, dtype=complex)
        u[interior] = u_i
        u[bnd] = X @ u_i
        u /= math.sqrt(float(np.sum(w * np.abs(u) ** 2)))
        funcs[j] = u
    return OutgoingSubspace(segment=seg, weights=w, t=t_all[:n_keep],
                            functions=funcs, t_all=t_all)
