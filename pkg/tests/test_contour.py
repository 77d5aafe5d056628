"""Dilated contours, symbol sectors, and pulled-back operator coefficients.

Oracles: the contour maps have closed forms (piecewise-linear / switched
profiles), and the symbol's argument is exactly -2*atan(f'').
"""

import numpy as np
import pytest

from reslab import contour

THETA = np.pi / 3


def test_lipschitz_contour_identity_on_obstacle():
    c = contour.make_scaled_contour((-1.0, 1.0), THETA)
    y = np.linspace(-1.0, 1.0, 101)
    np.testing.assert_allclose(c.gamma(y), y, atol=1e-15)
    np.testing.assert_allclose(c.dgamma(y[1:-1]), 1.0, atol=1e-15)


def test_lipschitz_contour_rotates_outside():
    c = contour.make_scaled_contour((-1.0, 1.0), THETA)
    t = np.tan(THETA)
    y = np.array([1.5, 3.0, -2.2])
    d = np.where(y > 1.0, y - 1.0, y + 1.0)
    np.testing.assert_allclose(c.gamma(y), y + 1j * t * d, rtol=1e-14)
    # slope of the dilated piece: arg(gamma') = theta
    np.testing.assert_allclose(np.angle(c.dgamma(y)), THETA, rtol=1e-14)


def test_smooth_contour_profile():
    c = contour.make_scaled_contour((-1.0, 1.0), THETA, smooth=True)
    assert c.r0 == 1.0
    y = np.linspace(-9.0, 9.0, 4001)
    fpp = c.f_second(y)
    assert np.all(fpp >= -1e-13)
    # convexity strictly positive past half the switch width
    sel = (np.abs(y) > 1.0 + 0.5 * c.r0) & (np.abs(y) < 1.0 + 4.0)
    assert np.all(fpp[sel] > 1e-3)
    # saturated rotation beyond the switch: f'' = tan(theta)
    far = np.abs(y) > 1.0 + c.r0 + 1e-9
    np.testing.assert_allclose(fpp[far], np.tan(THETA), rtol=1e-12)
    # C^1: finite differences of gamma match dgamma
    ys = np.linspace(0.5, 3.5, 301)
    step = 1e-6
    fd = (c.gamma(ys + step) - c.gamma(ys - step)) / (2 * step)
    np.testing.assert_allclose(fd, c.dgamma(ys), rtol=1e-7, atol=1e-8)


def test_contour_segments_and_truncation():
    c = contour.make_scaled_contour((-1.0, 1.0), THETA)
    assert c.truncation == 8.0
    assert len(c.segments) == 3  # [lo-T, lo], [lo, hi], [hi, hi+T]
    cs = contour.make_scaled_contour((-1.0, 1.0), THETA, smooth=True)
    assert len(cs.segments) == 5
    ends = [seg.z_end.real for seg in cs.segments]
    assert ends == sorted(ends)


def test_make_scaled_contour_validation():
    with pytest.raises(ValueError):
        contour.make_scaled_contour((1.0, -1.0), THETA)
    with pytest.raises(ValueError):
        contour.make_scaled_contour((-1.0, 1.0), 0.0)
    with pytest.raises(ValueError):
        contour.make_scaled_contour((-1.0, 1.0), np.pi / 2)


def test_symbol_sector_argument_law():
    eta = np.array([1.0, -2.0, 0.5])
    # undilated: the symbol is exactly eta^2
    np.testing.assert_allclose(contour.scaled_symbol_sector(0.0, eta), eta**2,
                               rtol=1e-15)
    # dilated: arg = -2 atan(f''), modulus ratio = 1/(1 + f''^2)
    for fpp in (0.3, 1.0, np.tan(THETA)):
        mod, ang = contour.sector_bounds(fpp, eta)
        np.testing.assert_allclose(ang, -2.0 * np.arctan(fpp), rtol=1e-13)
        np.testing.assert_allclose(mod, 1.0 / (1.0 + fpp**2), rtol=1e-13)
    # full rotation pins the sector edge at -2*theta, inside (-pi, 0)
    _, ang = contour.sector_bounds(np.tan(THETA), np.array([1.0]))
    np.testing.assert_allclose(ang, -2.0 * THETA, rtol=1e-14)
    assert -np.pi < ang[0] < 0.0


def test_sector_misses_admissible_window():
    # the scaled essential spectrum is the ray e^{-2 i theta} R_+; at the full
    # rotation theta = pi/3 it has Re <= 0 everywhere, so it cannot meet any
    # admissible window rectangle (Re >= 1/2)
    from reslab import model
    w = model.SpectralWindow(0.5, 2.0, 1.2)
    rect = model.validate_window(w, 0.05)
    r = np.linspace(0.0, 50.0, 1001)
    ray = r * np.exp(-2j * THETA)
    assert np.max(ray.real) <= 0.0 < rect[0]


def test_bent_path_geometry():
    bp = contour.bent_path(1.5, 5.0, nodes_per_segment=40)
    assert bp.delta == 1.5 and bp.s0 == 5.0
    rot = np.exp(1j * THETA)
    s = bp.nodes
    want = np.where(s <= 1.5, s + 0.0j, 1.5 + rot * (s - 1.5))
    np.testing.assert_allclose(bp.points, want, atol=1e-14)
    np.testing.assert_allclose(bp.gamma(np.array([0.3, 2.0])),
                               [0.3, 1.5 + rot * 0.5], rtol=1e-14)
    np.testing.assert_allclose(bp.dgamma(np.array([0.3, 2.0])),
                               [1.0, rot], rtol=1e-14)
    # two segments, shared elbow node; the duplicate keeps the straight slope
    assert len(bp.segments) == 2
    elbow = len(bp.segments[0].nodes) - 1
    assert bp.dpoints[elbow] == 1.0 + 0.0j


def test_bent_path_degenerate_and_invalid():
    ray = contour.bent_path(0.0, 3.0)
    assert len(ray.segments) == 1
    np.testing.assert_allclose(np.angle(ray.points[1:]), THETA, rtol=1e-13)
    with pytest.raises(ValueError):
        contour.bent_path(-0.1, 3.0)
    with pytest.raises(ValueError):
        contour.bent_path(2.0, 2.0)


def test_transformed_coeffs_on_bent_path():
    V = lambda x: np.exp(-np.asarray(x) ** 2)
    h, z = 0.1, 1.0 - 0.2j
    bp = contour.bent_path(2.0, 6.0, nodes_per_segment=30)
    co = contour.transformed_operator_coeffs(bp, V, h, z)
    straight = bp.nodes <= 2.0
    # real piece: plain operator
    np.testing.assert_allclose(co["c2"][straight], -h**2, rtol=1e-14)
    np.testing.assert_allclose(co["c1"], 0.0, atol=1e-15)
    np.testing.assert_allclose(co["c0"], V(bp.points) - z, rtol=1e-14)
    # rotated piece: constant Jacobian e^{i pi/3}
    rot2 = np.exp(2j * THETA)
    np.testing.assert_allclose(co["c2"][~straight], -h**2 / rot2, rtol=1e-13)


def test_transformed_coeffs_on_scaled_contour():
    V = lambda x: -3.0 * np.exp(-np.asarray(x) ** 2 / 0.5)
    h = 0.1
    c = contour.make_scaled_contour((-1.0, 1.0), THETA, smooth=True,
                                    nodes_per_segment=40)
    co = contour.transformed_operator_coeffs(c, V, h, z=0.5)
    inside = np.abs(co["t"]) <= 0.999
    np.testing.assert_allclose(co["c2"][inside], -h**2, rtol=1e-12)
    np.testing.assert_allclose(co["c1"][inside], 0.0, atol=1e-10)
    # far out the Jacobian saturates at 1 + i tan(theta)
    far = co["t"] > 1.0 + c.r0 + 0.5
    np.testing.assert_allclose(co["c2"][far],
                               -h**2 / (1.0 + 1j * np.tan(THETA)) ** 2,
                               rtol=1e-6)
    # gamma'' consistency: numerical second derivative matches the
    # differentiated switch profile to finite-difference accuracy
    ys = np.linspace(1.2, 1.8, 41)
    d2 = contour._num_d2gamma(c, ys)
    step = 1e-5
    fd = (c.dgamma(ys + step) - c.dgamma(ys - step)) / (2 * step)
    np.testing.assert_allclose(d2, fd, rtol=1e-3, atol=1e-8)
