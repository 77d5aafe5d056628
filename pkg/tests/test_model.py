"""Shared model constants, window admissibility, and potential/perturbation
parameter types.

Oracles: closed-form constants recomputed with mpmath, and direct evaluation
of the defining formulas.
"""

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reslab import model
from reslab.wkb import airy_zero


def test_kappa_closed_form():
    want = float(mp.mpf(2) ** mp.mpf("-1/3") * mp.cos(mp.pi / 6))
    np.testing.assert_allclose(model.kappa(), want, rtol=1e-15)
    # q_min enters through its 2/3 power
    np.testing.assert_allclose(model.kappa(8.0), want * 4.0, rtol=1e-14)


def test_c_max_value():
    zeta1 = airy_zero(1)
    want = 2.0 * 0.5 ** (2.0 / 3.0) * model.kappa() * zeta1
    np.testing.assert_allclose(model.c_max(), want, rtol=1e-13)
    assert 2.02 < model.c_max() < 2.03


def test_strip_depth_scalings():
    h, re_z = 0.05, 1.3
    base = model.strip_depth(h, re_z, margin_c=0.0)
    np.testing.assert_allclose(base, -2.0 * (h * re_z) ** (2.0 / 3.0)
                               * model.kappa() * airy_zero(1), rtol=1e-13)
    # h -> 8h deepens the strip boundary by 8^(2/3) = 4
    np.testing.assert_allclose(model.strip_depth(8 * h, re_z, margin_c=0.0),
                               4.0 * base, rtol=1e-13)
    # the margin lifts the line by exactly margin_c * h
    np.testing.assert_allclose(model.strip_depth(h, re_z, margin_c=2.0)
                               - model.strip_depth(h, re_z, margin_c=0.0),
                               2.0 * h, rtol=1e-12)
    # vectorized in re_z
    arr = model.strip_depth(h, np.array([0.5, 1.0, 2.0]))
    assert arr.shape == (3,)
    assert np.all(np.diff(arr) < 0)


def test_spectral_window_rectangle():
    w = model.SpectralWindow(0.6, 1.8, 1.1)
    h = 0.04
    re_lo, re_hi, im_lo, im_hi = w.rectangle(h)
    assert (re_lo, re_hi, im_hi) == (0.6, 1.8, 0.0)
    np.testing.assert_allclose(im_lo, -1.1 * h ** (2.0 / 3.0), rtol=1e-14)


def test_validate_window_accepts_and_rejects():
    h = 0.1
    good = model.SpectralWindow(0.5, 2.0, 1.2)
    assert model.validate_window(good, h) == good.rectangle(h)
    for bad in (model.SpectralWindow(0.4, 2.0, 1.2),
                model.SpectralWindow(0.5, 2.1, 1.2),
                model.SpectralWindow(1.5, 1.5, 1.2),
                model.SpectralWindow(0.5, 2.0, 0.0),
                model.SpectralWindow(0.5, 2.0, model.c_max())):
        with pytest.raises(ValueError):
            model.validate_window(bad, h)
    with pytest.raises(ValueError):
        model.validate_window(good, 1.0)
    with pytest.raises(ValueError):
        model.validate_window(good, 0.0)


def test_derive_parameters_formula_and_preconditions():
    n, v0, s, eps, theta = 1, 2, 1.0, 0.25, 0.25
    d = model.derive_parameters(n, v0, s, eps, theta)
    m = (v0 + (1.0 / 3.0 + n) / (1 - 2 * theta)) / (s - n / 2 - eps)
    np.testing.assert_allclose(d.M_min, m, rtol=1e-12)
    np.testing.assert_allclose(d.M_tilde_min,
                               (n / 2 + eps) * m + 1 + 3 * n / 2 + v0,
                               rtol=1e-12)
    for args in ((0, 2, 1.0, 0.25, 0.25),    # n < 1
                 (1, 0, 1.0, 0.25, 0.25),    # v0 <= (n-1)/2
                 (1, 2, 2.6, 0.25, 0.25),    # s >= v0 + 1/2
                 (1, 2, 1.0, 0.6, 0.25),     # eps >= s - n/2
                 (1, 2, 1.0, 0.25, 0.5)):    # theta >= 1/2
        with pytest.raises(ValueError):
            model.derive_parameters(*args)


def test_epsilon0_formula():
    h = 0.05
    # default tau0 = h^(5/3)
    want = h * (np.log(1 / h) ** 2 + (5.0 / 3.0) * np.log(1 / h))
    np.testing.assert_allclose(model.epsilon0(h), want, rtol=1e-12)
    tau0 = h**2
    want = h * (np.log(1 / h) ** 2 + np.log(1 / tau0))
    np.testing.assert_allclose(model.epsilon0(h, tau0), want, rtol=1e-12)
    with pytest.raises(ValueError):
        model.epsilon0(h, h)  # tau0 above h^(5/3)
    with pytest.raises(ValueError):
        model.epsilon0(1.5)


def test_perturbation_config_coupling():
    cfg = model.PerturbationConfig(alpha=3.0)
    h = 0.1
    np.testing.assert_allclose(cfg.tau0_at(h), h ** (5.0 / 3.0), rtol=1e-14)
    np.testing.assert_allclose(cfg.delta_at(h), h ** (5.0 / 3.0 + 3.0),
                               rtol=1e-13)
    np.testing.assert_allclose(cfg.delta_at(h, c_delta=4.0),
                               cfg.delta_at(h) / 4.0, rtol=1e-14)
    d = cfg.derived()
    assert d.M_min > 0 and d.M_tilde_min > 0


def test_square_well_values_and_depth_convention():
    V = model.PotentialSpec("square_well", (-1.0, 1.0), {"depth": -4.0})
    # params["depth"] IS the value on the support
    np.testing.assert_allclose(V(np.array([0.0, -0.99, 0.99])), -4.0)
    np.testing.assert_allclose(V(np.array([-1.01, 1.01, 5.0])), 0.0)
    # complex arguments select by the real part (scaled-contour evaluation)
    np.testing.assert_allclose(V(np.array([0.5 + 0.3j])), -4.0 + 0.0j)
    assert V.support_radius() == 1.0


def test_smooth_bump_profile():
    V = model.PotentialSpec("smooth_bump", (-1.0, 1.0),
                            {"amplitude": -4.0, "edge_width": 0.1})
    x = np.linspace(-1.0, 1.0, 2001)
    v = V(x)
    assert v.min() >= -4.0 - 1e-12
    np.testing.assert_allclose(V(np.array([0.0])), -4.0, rtol=1e-12)
    # vanishes identically at and beyond the edges
    np.testing.assert_allclose(V(np.array([-1.0, 1.0, -1.2, 1.2])), 0.0)
    # symmetric profile
    np.testing.assert_allclose(v, v[::-1], atol=1e-12)
    # flat to all orders: still tiny well inside the edge layer
    assert abs(V(np.array([-0.999]))[0]) < 1e-3


def test_radial_effective_potential():
    base = lambda r: -2.0 * np.exp(-r)
    V = model.PotentialSpec("radial_effective", (0.1, 3.0),
                            {"ell": 2, "h": 0.1, "base": base})
    r = np.array([0.5, 1.0, 2.0])
    np.testing.assert_allclose(V(r), 0.01 * 6.0 / r**2 + base(r), rtol=1e-13)
    with pytest.raises(ValueError):
        V(np.array([-0.2]))


def test_tabulated_potential_interpolates():
    xs = np.linspace(-1, 1, 11)
    vs = xs**2 - 1.0
    V = model.PotentialSpec("tabulated", (-1.0, 1.0), {"x": xs, "v": vs})
    np.testing.assert_allclose(V(xs), vs, atol=1e-14)
    np.testing.assert_allclose(V(np.array([-3.0, 3.0])), 0.0)
    # piecewise-linear between the table points
    mid = 0.5 * (xs[3] + xs[4])
    np.testing.assert_allclose(V(np.array([mid])),
                               0.5 * (vs[3] + vs[4]), rtol=1e-13)


def test_potential_spec_validation():
    with pytest.raises(ValueError):
        model.PotentialSpec("gaussian", (-1.0, 1.0))
    with pytest.raises(ValueError):
        model.PotentialSpec("square_well", (1.0, -1.0))


def test_as_callable():
    f = lambda x: x**2
    assert model.as_callable(f) is f
    V = model.PotentialSpec("square_well", (-1.0, 1.0))
    g = model.as_callable(V)
    np.testing.assert_allclose(g(np.array([0.0])), -4.0)


def test_switch_endpoints_and_symmetry():
    t = np.linspace(-1.0, 2.0, 601)
    s = model._switch(t)
    assert np.all(s[t <= 0] == 0.0)
    assert np.all(s[t >= 1] == 1.0)
    assert np.all(np.diff(s) >= -1e-15)
    np.testing.assert_allclose(model._switch(np.array([0.5]))[0], 0.5,
                               rtol=1e-14)
    # complementary symmetry of the C^inf switch
    np.testing.assert_allclose(s + model._switch(1.0 - t), 1.0, atol=1e-12)
    # flat to all orders at the ends
    assert model._switch(np.array([0.02]))[0] < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.01, max_value=0.5),
       st.floats(min_value=0.51, max_value=1.99),
       st.floats(min_value=0.01, max_value=2.0))
def test_validate_window_property(a, b, c):
    w = model.SpectralWindow(a, b, c)
    admissible = 0.5 <= a < b <= 2.0 and 0.0 < c < model.c_max()
    if admissible:
        rect = model.validate_window(w, 0.1)
        assert rect[0] < rect[1] and rect[2] < rect[3] == 0.0
    else:
        with pytest.raises(ValueError):
            model.validate_window(w, 0.1)
