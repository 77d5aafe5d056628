"""Complex-dilated contours and bent model paths.

The contour is the graph x = y + i f'(y) over the real line, with f = 0 on the
obstacle and a convex profile outside, so the far field is rotated by the
dilation angle.  The bent path is the half-line model contour: real up to a
small elbow delta, then rotated by pi/3.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cheb import Segment


@dataclass
class ScaledContour:
    """Piecewise-defined dilated contour over y in [y_min, y_max].

    segments hold the collocation data; `gamma`, `dgamma`, `d2gamma` evaluate
    the contour map and its y-derivatives; f_second gives the profile
    convexity f''(y).
    """

    obstacle: tuple[float, float]
    angle: float
    smooth: bool
    truncation: float
    segments: list[Segment] = field(default_factory=list)
    r0: float = 0.0  # switch width of the smooth profile

    def _fp_fpp(self, y):
        """f'(y), f''(y) for the chosen profile."""
        y = np.asarray(y, dtype=float)
        lo, hi = self.obstacle
        t = np.tan(self.angle)
        d = np.where(y > hi, y - hi, np.where(y < lo, y - lo, 0.0))  # signed distance
        if not self.smooth:
            return t * d, t * (d != 0.0)
        # smooth variant: f'(y) = tan(theta) * d * w(|d|/r0) with a C^inf switch w
        r0 = self.r0
        a = np.abs(d) / r0
        w = _switch(a)
        dw = _dswitch(a) / r0
        fp = t * d * w
        fpp = t * (w + np.abs(d) * dw)
        return fp, fpp

    def gamma(self, y):
        fp, _ = self._fp_fpp(y)
        return np.asarray(y, dtype=float) + 1j * fp

    def dgamma(self, y):
        _, fpp = self._fp_fpp(y)
        return 1.0 + 1j * fpp

    def f_second(self, y):
        return self._fp_fpp(y)[1]


def _switch(t):
    t = np.asarray(t, dtype=float)
    f = np.zeros_like(t)
    pos = t > 0
    f[pos] = np.exp(-1.0 / t[pos])
    g = np.zeros_like(t)
    pos1 = (1.0 - t) > 0
    g[pos1] = np.exp(-1.0 / (1.0 - t[pos1]))
    return f / (f + g)


def _dswitch(t, step=1e-6):
    t = np.asarray(t, dtype=float)
    return (_switch(t + step) - _switch(t - step)) / (2 * step)


def make_scaled_contour(
    obstacle: tuple[float, float],
    angle: float,
    smooth: bool = False,
    truncation: float | None = None,
    nodes_per_segment: int = 120,
    r0: float | None = None,
) -> ScaledContour:
    """Build the dilated contour for a 1D obstacle (interval).

    angle in (0, pi/2); truncation defaults to 8x the support radius beyond
    each endpoint.  The Lipschitz variant rotates immediately at the boundary
    (profile f = tan(theta) d^2/2); the smooth variant switches the rotation on
    over a width r0 (default: half the support radius) with f'' >= 0
    everywhere and f'' > 0 for d >= r0/2.
    """
    lo, hi = obstacle
    if not lo < hi:
        raise ValueError("obstacle must be a nonempty interval")
    if not 0 < angle < np.pi / 2:
        raise ValueError("dilation angle must be in (0, pi/2)")
    rad = 0.5 * (hi - lo)
    if truncation is None:
        truncation = 8.0 * rad
    if r0 is None:
        r0 = rad
    c = ScaledContour(
        obstacle=(lo, hi), angle=angle, smooth=smooth, truncation=truncation, r0=r0
    )
    # segments in y; the complex nodes are images under gamma
    breaks = [lo - truncation, lo, hi, hi + truncation]
    if smooth:
        # add breakpoints where the switch saturates, to keep segments analytic-friendly
        breaks = [lo - truncation, lo - r0, lo, hi, hi + r0, hi + truncation]
    for y0, y1 in zip(breaks[:-1], breaks[1:]):
        c.segments.append(Segment(y0, y1, nodes_per_segment))
    return c


def scaled_symbol_sector(f_second, eta):
    """Principal-symbol quadratic form ((1 + i f'')^{-2} eta, eta) of the
    dilated Laplacian; returns the complex value(s).

    Ellipticity: |value| is comparable to |eta|^2, and arg stays in
    (-pi, 0]; with f'' > 0 the argument is pinned inside (-pi, 0) strictly.
    """
    f_second = np.asarray(f_second, dtype=float)
    eta = np.asarray(eta)
    C = (1.0 + 1j * f_second) ** 2
    return eta**2 / C


def sector_bounds(f_second, eta):
    """(modulus ratio to |eta|^2, argument) of the scaled symbol."""
    val = scaled_symbol_sector(f_second, eta)
    eta = np.asarray(eta)
    mod = np.abs(val) / np.abs(eta) ** 2
    return mod, np.angle(val)


@dataclass
class BentPath:
    """Half-line contour: real on [0, delta], then rotated by pi/3 up to s0."""

    delta: float
    s0: float
    nodes: np.ndarray  # arc parameter s
    points: np.ndarray  # gamma(s)
    dpoints: np.ndarray  # gamma'(s)
    segments: list[Segment]

    def gamma(self, s):
        s = np.asarray(s, dtype=float)
        rot = np.exp(1j * np.pi / 3)
        return np.where(s <= self.delta, s + 0.0j, self.delta + rot * (s - self.delta))

    def dgamma(self, s):
        s = np.asarray(s, dtype=float)
        rot = np.exp(1j * np.pi / 3)
        return np.where(s <= self.delta, 1.0 + 0.0j, rot)


def bent_path(delta: float, s0: float, nodes_per_segment: int = 80) -> BentPath:
    """gamma_delta(s) = s on [0, delta], delta + e^(i pi/3)(s - delta) beyond.

    delta = 0 gives the fully rotated ray.  Chebyshev-Lobatto nodes per
    segment in the arc parameter s.
    """
    if delta < 0 or s0 <= delta:
        raise ValueError("need 0 <= delta < s0")
    rot = np.exp(1j * np.pi / 3)
    segs = []
    if delta > 0:
        segs.append(Segment(0.0, delta, nodes_per_segment))
    segs.append(Segment(delta, s0, nodes_per_segment))
    s_nodes = np.concatenate([seg.nodes.real for seg in segs])
    pts = np.where(s_nodes <= delta, s_nodes + 0.0j, delta + rot * (s_nodes - delta))
    dpts = np.where(s_nodes <= delta, 1.0 + 0.0j, rot)
    # the elbow node belongs to both segments; keep one copy per segment for
    # collocation purposes (discontinuous gamma' there)
    if delta > 0:
        dpts[len(segs[0].nodes) - 1] = 1.0 + 0.0j
    return BentPath(delta=delta, s0=s0, nodes=s_nodes, points=pts, dpoints=dpts, segments=segs)


def transformed_operator_coeffs(path, V, h: float, z=0.0):
    """Coefficient tables of the pulled-back operator on a parametrized path.

    For x = gamma(t), the operator -h^2 d^2/dx^2 + V - z becomes
        c2(t) u'' + c1(t) u' + c0(t) u
    with c2 = -h^2/gamma'^2, c1 = h^2 gamma''/gamma'^3, c0 = V(gamma(t)) - z,
    primes in t.  `path` needs gamma/dgamma evaluable on its nodes; a second
    derivative of gamma, when present, enters c1 (piecewise-linear paths have
    gamma'' = 0).

    Returns dict with nodes t, points x, c2, c1, c0.
    """
    if hasattr(path, "nodes") and hasattr(path, "points"):
        t = np.asarray(path.nodes)
        x = np.asarray(path.points)
        dx = np.asarray(path.dpoints)
        d2x = np.zeros_like(dx)
        if hasattr(path, "d2points"):
            d2x = np.asarray(path.d2points)
    else:  # a ScaledContour: parametrize by y over its segments
        t = np.concatenate([seg.nodes.real for seg in path.segments])
        x = path.gamma(t)
        dx = path.dgamma(t)
        d2x = _num_d2gamma(path, t)
    c2 = -(h**2) / dx**2
    c1 = h**2 * d2x / dx**3
    c0 = V(x) - z
    return {"t": t, "x": x, "c2": c2, "c1": c1, "c0": c0}


def _num_d2gamma(contour: ScaledContour, y, step=1e-6):
    return (contour.dgamma(y + step) - contour.dgamma(y - step)) / (2 * step)
