"""Problem data: potentials, spectral windows, perturbation parameters.

Everything downstream (contours, WKB, resonance counting) consumes the plain
dataclasses defined here.  Parameter formulas are evaluated in extended
precision (mpmath, 50 digits) and returned as floats.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import mpmath as mp
import numpy as np

# first zero of Ai(-t); verified against an independent bisection oracle in the tests
ZETA1 = 2.3381074104597670385

# margin constant in the exterior resonance-free strip depth, calibrated once on
# the V=0 radial model and frozen (see tests/test_resonance.py)
STRIP_MARGIN_C = 1.0


def kappa(q_min: float = 1.0) -> float:
    """Strip-depth constant 2^(-1/3) cos(pi/6) * q_min^(2/3)."""
    with mp.workdps(50):
        val = mp.mpf(2) ** mp.mpf("-1/3") * mp.cos(mp.pi / 6) * mp.mpf(q_min) ** mp.mpf("2/3")
    return float(val)


def c_max(q_min: float = 1.0) -> float:
    """Largest admissible window depth coefficient: 2 * (1/2)^(2/3) * kappa * zeta1.

    Windows live in Re z >= 1/2, and the depth coefficient must keep the whole
    rectangle above the exterior-model strip; the worst case is Re z = 1/2.
    """
    with mp.workdps(50):
        val = (
            2
            * mp.mpf("0.5") ** mp.mpf("2/3")
            * (mp.mpf(2) ** mp.mpf("-1/3") * mp.cos(mp.pi / 6) * mp.mpf(q_min) ** mp.mpf("2/3"))
            * mp.mpf(repr(ZETA1))
        )
    return float(val)


def strip_depth(h: float, re_z, q_min: float = 1.0, margin_c: float = STRIP_MARGIN_C):
    """Imaginary part of the exterior resonance-free strip boundary at Re z.

    The model has no eigenvalues with Im z above
    -2 (h Re z)^(2/3) kappa zeta1 + margin_c * h.
    """
    re_z = np.asarray(re_z, dtype=float)
    return -2.0 * (h * re_z) ** (2.0 / 3.0) * kappa(q_min) * ZETA1 + margin_c * h


@dataclass
class SpectralWindow:
    """Energy window [a, b] with depth coefficient c: the counting rectangle is
    [a, b] + i*c*h^(2/3)*[-1, 0]."""

    a: float
    b: float
    c: float

    def rectangle(self, h: float) -> tuple[float, float, float, float]:
        """(re_lo, re_hi, im_lo, im_hi) of the counting rectangle."""
        return (self.a, self.b, -self.c * h ** (2.0 / 3.0), 0.0)


def validate_window(window: SpectralWindow, h: float) -> tuple[float, float, float, float]:
    """Check admissibility and return the concrete rectangle.

    Raises ValueError on violations: the window must satisfy
    1/2 <= a < b <= 2 and 0 < c < c_max, and h must lie in (0, 1).
    """
    if not 0.0 < h < 1.0:
        raise ValueError(f"h must be in (0, 1), got {h}")
    if not (0.5 <= window.a < window.b <= 2.0):
        raise ValueError(f"window [a, b] = [{window.a}, {window.b}] must satisfy 1/2 <= a < b <= 2")
    cm = c_max()
    if not (0.0 < window.c < cm):
        raise ValueError(f"depth coefficient c = {window.c} must be in (0, {cm:.6f})")
    return window.rectangle(h)


@dataclass
class DerivedParameters:
    M_min: float
    M_tilde_min: float
    kappa: float
    c_max: float


def derive_parameters(n: int, v0: int, s: float, eps: float, theta: float) -> DerivedParameters:
    """Smallest admissible mode/regularity exponents for the perturbation setup.

    M_min   = (v0 + (1/3 + n)/(1 - 2 theta)) / (s - n/2 - eps)
    M~_min  = (n/2 + eps) M_min + 1 + 3n/2 + v0

    Preconditions: v0 integer > (n-1)/2, n/2 < s < v0 + 1/2,
    0 < eps < s - n/2, 0 < theta < 1/2.
    """
    if n < 1:
        raise ValueError("dimension n must be >= 1")
    if v0 != int(v0) or v0 <= (n - 1) / 2:
        raise ValueError(f"v0 must be an integer > (n-1)/2, got {v0}")
    if not (n / 2 < s < v0 + 0.5):
        raise ValueError(f"s = {s} must satisfy n/2 < s < v0 + 1/2")
    if not (0 < eps < s - n / 2):
        raise ValueError(f"eps = {eps} must satisfy 0 < eps < s - n/2")
    if not (0 < theta < 0.5):
        raise ValueError(f"theta = {theta} must be in (0, 1/2)")
    with mp.workdps(50):
        nn, vv = mp.mpf(n), mp.mpf(v0)
        ss, ee, tt = mp.mpf(repr(s)), mp.mpf(repr(eps)), mp.mpf(repr(theta))
        m = (vv + (mp.mpf(1) / 3 + nn) / (1 - 2 * tt)) / (ss - nn / 2 - ee)
        mt = (nn / 2 + ee) * m + 1 + 3 * nn / 2 + vv
        m_f, mt_f = float(m), float(mt)
    return DerivedParameters(M_min=m_f, M_tilde_min=mt_f, kappa=kappa(), c_max=c_max())


def epsilon0(h: float, tau0: float | None = None) -> float:
    """Coupling-strength scale h((log 1/h)^2 + log 1/tau0).

    tau0 defaults to h^(5/3), the top of its admissible range (0, h^(5/3)].
    """
    if not 0.0 < h < 1.0:
        raise ValueError(f"h must be in (0, 1), got {h}")
    if tau0 is None:
        tau0 = h ** (5.0 / 3.0)
    if not 0.0 < tau0 <= h ** (5.0 / 3.0) * (1 + 1e-12):
        raise ValueError(f"tau0 = {tau0} must be in (0, h^(5/3)]")
    with mp.workdps(50):
        hh, tt = mp.mpf(repr(h)), mp.mpf(repr(tau0))
        val = hh * (mp.log(1 / hh) ** 2 + mp.log(1 / tt))
    return float(val)


@dataclass
class PerturbationConfig:
    """Parameters of the random perturbation delta * Theta * q_omega."""

    n: int = 1
    v0: int = 2
    s: float = 1.0
    eps: float = 0.25
    theta: float = 0.25
    alpha: float = 3.0
    tau0: float | None = None  # None -> h^(5/3) at use time
    R: float = 1.0  # coefficient ball radius
    L: float = 10.0  # frequency cutoff

    def tau0_at(self, h: float) -> float:
        return h ** (5.0 / 3.0) if self.tau0 is None else self.tau0

    def delta_at(self, h: float, c_delta: float = 1.0) -> float:
        """Coupling delta = tau0 h^alpha / C."""
        return self.tau0_at(h) * h**self.alpha / c_delta

    def derived(self) -> DerivedParameters:
        return derive_parameters(self.n, self.v0, self.s, self.eps, self.theta)


# ---------------------------------------------------------------------------
# potentials


def _switch(t: np.ndarray) -> np.ndarray:
    """C-infinity monotone switch: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    f = np.zeros_like(t)
    pos = t > 0
    f[pos] = np.exp(-1.0 / t[pos])
    g = np.zeros_like(t)
    pos1 = (1.0 - t) > 0
    g[pos1] = np.exp(-1.0 / (1.0 - t[pos1]))
    return f / (f + g)


@dataclass
class PotentialSpec:
    """A compactly supported 1D potential (or radial effective potential).

    kind: square_well | smooth_bump | radial_effective | tabulated
    support: (x_lo, x_hi) — convex hull of the support, the "obstacle"
    params: kind-specific parameters
    v0: vanishing order datum at the support endpoints (smooth_bump vanishes to
        all orders, so any v0 check passes)
    """

    kind: str
    support: tuple[float, float]
    params: dict = field(default_factory=dict)
    v0: int = 2

    def __post_init__(self):
        if self.kind not in {"square_well", "smooth_bump", "radial_effective", "tabulated"}:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if not self.support[0] < self.support[1]:
            raise ValueError("support must be a nonempty interval")

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x):
        x = np.asarray(x)
        lo, hi = self.support
        if self.kind == "square_well":
            depth = self.params.get("depth", -4.0)
            return np.where((x.real >= lo) & (x.real <= hi), depth, 0.0) + 0.0 * x
        if self.kind == "smooth_bump":
            amp = self.params.get("amplitude", -4.0)
            w = self.params.get("edge_width", 0.1 * (hi - lo))
            val = amp * _switch((x.real - lo) / w) * _switch((hi - x.real) / w)
            return val + 0.0 * x
        if self.kind == "radial_effective":
            ell = self.params["ell"]
            h = self.params["h"]
            base = self.params.get("base")
            r = np.asarray(x, dtype=float)
            if np.any(r <= 0):
                raise ValueError("radial coordinate must be positive")
            cent = h**2 * ell * (ell + 1) / r**2
            return cent + (base(r) if base is not None else 0.0)
        # tabulated
        xs = np.asarray(self.params["x"], dtype=float)
        vs = np.asarray(self.params["v"], dtype=float)
        out = np.interp(np.asarray(x, dtype=float), xs, vs, left=0.0, right=0.0)
        return out

    def support_radius(self) -> float:
        lo, hi = self.support
        return 0.5 * (hi - lo)


def as_callable(potential) -> Callable:
    """Accept either a PotentialSpec or a plain callable."""
    if isinstance(potential, PotentialSpec):
        return potential.evaluate
    if callable(potential):
        return potential
    raise TypeError(f"cannot interpret {potential!r} as a potential")
