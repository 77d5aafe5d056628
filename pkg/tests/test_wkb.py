"""Exact-WKB machinery: Airy data, eiconal/transport hierarchy, the gauged
Volterra construction with its remainder law, and turning-point zero
localization.

Oracles: mpmath Airy functions, closed-form phases, direct high-accuracy ODE
integration (an independent route to the same solutions), and the exactly
solvable linear potential V = x whose subdominant solution is Ai(h^{-2/3}x).
"""

import mpmath as mp
import numpy as np
import pytest

from reslab import wkb


def test_airy_zero_against_mpmath():
    for j in range(1, 7):
        want = float(-mp.airyaizero(j))
        np.testing.assert_allclose(wkb.airy_zero(j), want, rtol=1e-13)
    np.testing.assert_allclose(wkb.airy_zero(1), 2.338107410459767, rtol=1e-14)
    np.testing.assert_allclose(wkb.airy_zero(2), 4.087949444130970616,
                               rtol=1e-14)


def test_airy_values_complex_against_mpmath():
    for t in (0.3, -1.2, 0.5 + 0.4j, -2.0 - 1.0j):
        np.testing.assert_allclose(complex(wkb.airy_ai(t)),
                                   complex(mp.airyai(t)), rtol=1e-12)
        np.testing.assert_allclose(complex(wkb.airy_ai_deriv(t)),
                                   complex(mp.airyai(t, 1)), rtol=1e-12)


def test_segment_path():
    p = wkb.segment_path(0.5, 2.0 + 1.0j, 101)
    assert p[0] == 0.5 and p[-1] == 2.0 + 1.0j and len(p) == 101
    np.testing.assert_allclose(np.diff(p), p[1] - p[0], rtol=1e-12)


def test_locate_turning_point():
    z0, vp = wkb.locate_turning_point(lambda z: z - 0.37, guess=0.0)
    np.testing.assert_allclose(z0, 0.37, atol=1e-12)
    np.testing.assert_allclose(vp, 1.0, rtol=1e-8)
    z0, vp = wkb.locate_turning_point(np.sin, guess=0.2)
    np.testing.assert_allclose(z0, 0.0, atol=1e-12)
    np.testing.assert_allclose(vp, 1.0, rtol=1e-8)


def test_eiconal_closed_form():
    # V = 1 + x^2, z = 0: phi(x) = [x sqrt(1+x^2) + asinh(x)] / 2
    path = wkb.segment_path(0.5, 2.2, 800)
    ph = wkb.solve_eiconal(lambda x: 1.0 + x * x, 0.0, path, sign=+1)
    F = lambda x: 0.5 * (x * np.sqrt(1 + x**2) + np.arcsinh(x))
    np.testing.assert_allclose(ph.phi, F(path.real) - F(path[0].real),
                               rtol=1e-9, atol=1e-11)
    np.testing.assert_allclose(ph.dphi, np.sqrt(1.0 + path**2), rtol=1e-12)
    assert ph.phi[0] == 0.0
    # sign flips the branch
    ph_m = wkb.solve_eiconal(lambda x: 1.0 + x * x, 0.0, path, sign=-1)
    np.testing.assert_allclose(ph_m.dphi, -ph.dphi, rtol=1e-12)


def test_transport_constant_potential_truncates():
    # V constant: the symbol is exactly the leading term, all corrections 0
    path = wkb.segment_path(0.0, 1.0, 400)
    ph = wkb.solve_eiconal(lambda x: 4.0 + 0.0 * x, 0.0, path, sign=+1)
    exp = wkb.transport_coefficients(ph, 3)
    np.testing.assert_allclose(exp.coeffs[0], 1.0, rtol=1e-13)
    for a in exp.coeffs[1:]:
        np.testing.assert_allclose(a, 0.0, atol=1e-7)


def test_volterra_converges_and_solves_the_ode():
    V = lambda x: 1.0 + x * x
    h = 0.05
    path = wkb.segment_path(0.5, 2.2, 1500)
    res = wkb.exact_wkb_volterra(V, path, h, 2, sign=+1)
    assert res.converged and res.iterations < 40
    np.testing.assert_allclose(res.coeffs[0], 1.0, rtol=1e-12)
    # independent route: propagate the initial data across the path with a
    # high-order RK integrator and compare at the far end
    sol = res.solution
    y_end, hdy_end = wkb.ode_propagate(V, h, path[0], path[-1],
                                       sol.y[0], sol.hdy[0])
    np.testing.assert_allclose(y_end, sol.y[-1], rtol=2e-6)
    np.testing.assert_allclose(hdy_end, sol.hdy[-1], rtol=2e-6)


def test_volterra_two_branches_wronskian_constant():
    V = lambda x: 1.0 + x * x
    h = 0.08
    path = wkb.segment_path(0.5, 2.0, 1200)
    up = wkb.exact_wkb_volterra(V, path, h, 1, sign=+1).solution
    um = wkb.exact_wkb_volterra(V, path, h, 1, sign=-1).solution
    w = wkb.wronskian(up, um)
    assert np.max(np.abs(w - w[0])) < 1e-9 * np.max(np.abs(w))
    assert np.min(np.abs(w)) > 0.0


def test_volterra_remainder_shrinks_with_order_and_h():
    # measure past a fixed station so the start layer (whose width tracks h)
    # never enters the comparison between different h
    V = lambda x: 1.0 + x * x
    path = wkb.segment_path(0.5, 2.2, 2500)
    probe = path.real >= 1.2
    maxr = {}
    for h in (0.08, 0.04):
        for N in (0, 1, 2):
            res = wkb.exact_wkb_volterra(V, path, h, N, sign=+1)
            maxr[h, N] = np.max(np.abs(res.remainder[res.interior & probe]))
        # deeper truncation -> smaller remainder at fixed h
        assert maxr[h, 0] > maxr[h, 1] > maxr[h, 2]
    # halving h divides the order-N remainder by about 2^(N+1)
    for N in (0, 1, 2):
        ratio = maxr[0.08, N] / maxr[0.04, N]
        assert 2 ** (N + 1) / 1.7 < ratio < 2 ** (N + 1) * 1.7


def test_volterra_remainder_bound_holds():
    # remainder law with the turning-point-distance weight: V = x + 1 has its
    # turning point at -1, away from the path
    V = lambda x: x + 1.0
    h = 0.04
    path = wkb.segment_path(0.5, 2.0, 1200)
    res = wkb.exact_wkb_volterra(V, path, h, 1, sign=+1, z0=-1.0)
    assert res.remainder_bound is not None
    inside = res.interior
    assert np.all(np.abs(res.remainder[inside])
                  <= res.remainder_bound[inside])


def test_subdominant_anchor_data():
    V = lambda x: 4.0 + 0.0 * np.asarray(x)
    y0, hdy0 = wkb.subdominant_anchor_data(V, 1.0, 0.1)
    assert y0 == 1.0
    np.testing.assert_allclose(hdy0, -2.0, rtol=1e-6)
    # general potential: h y'/y = -sqrt(V) - (h/4) V'/V at the anchor
    V2 = lambda x: 1.0 + np.asarray(x) ** 2
    y0, hdy0 = wkb.subdominant_anchor_data(V2, 2.0, 0.1)
    want = -np.sqrt(5.0) - (0.1 / 4.0) * (4.0 / 5.0)
    np.testing.assert_allclose(hdy0, want, rtol=1e-5)


def test_predict_zeros_airy_formula():
    # V = x: turning point 0, V' = 1, zeros at -zeta_j h^(2/3) exactly
    h = 0.02
    pred = wkb.predict_zeros(lambda x: x, h, (-0.8, 0.0),
                             dV=lambda x: np.ones_like(np.asarray(x, complex)))
    zs = np.array([wkb.airy_zero(j) for j in range(1, len(pred) + 1)])
    np.testing.assert_allclose(np.sort(pred.real)[::-1], -zs * h ** (2 / 3),
                               rtol=1e-10)
    assert len(pred) >= 4
    # scalar window: radius filter around the turning point
    pred2 = wkb.predict_zeros(lambda x: x, h, 4.5 * h ** (2 / 3),
                              dV=lambda x: np.ones_like(np.asarray(x, complex)))
    assert len(pred2) == 2  # zeta_1, zeta_2 < 4.5 < zeta_3


def test_detected_zeros_match_exact_airy():
    # for V = x the subdominant solution IS Ai(h^{-2/3}x): detection must
    # reproduce the predicted zeros at oracle accuracy, not just O(h^{4/3})
    V = lambda x: x
    dV = lambda x: np.ones_like(np.asarray(x, dtype=complex))
    for h in (0.04, 0.02):
        pred = wkb.predict_zeros(V, h, (-0.6, 0.0), dV=dV)
        det = wkb.detect_zeros(V, h, pred, anchor=1.5, dV=dV)
        assert np.max(np.abs(det - pred)) < 1e-10


def test_detected_zeros_quadratic_correction_scale():
    # V = x + 0.3 x^2 shares the Airy prediction but has a genuine h^(4/3)
    # correction; at fixed zero index the error shrinks by ~2^(4/3) per halving
    V = lambda x: x + 0.3 * x * x
    dV = lambda x: 1.0 + 0.6 * np.asarray(x, dtype=complex)
    errs = []
    for h in (0.04, 0.02):
        zs = np.array([wkb.airy_zero(j) for j in range(1, 3)])
        pred = -h ** (2.0 / 3.0) * zs
        det = wkb.detect_zeros(V, h, pred, anchor=1.5, dV=dV)
        errs.append(np.max(np.abs(det - pred)))
    ratio = errs[0] / errs[1]
    assert 2 ** (4 / 3) / 1.5 < ratio < 2 ** (4 / 3) * 1.5


def test_zero_localization_check():
    rep = wkb.zero_localization_check(
        lambda x: x + 0.3 * x * x, 0.02,
        dV=lambda x: 1.0 + 0.6 * np.asarray(x, dtype=complex))
    assert rep["outside_disc"]
    assert rep["min_disc_ratio"] > 0.5  # disc radius h^(2/3)/disc_const
    np.testing.assert_allclose(rep["turning_point"], 0.0, atol=1e-10)
    assert len(rep["zeros"]) == 6
    # zeros hug the traced equal-modulus curve
    assert np.max(rep["distances"]) < 0.05


def test_connection_coefficients_two_branch_expansion():
    # a mixture's coefficients are only recoverable while the two branches
    # stay within the working precision's dynamic range of each other, so use
    # a short path and a tame h
    V = lambda x: 1.0 + x * x
    h = 0.3
    path = wkb.segment_path(0.5, 0.9, 600)
    up = wkb.exact_wkb_volterra(V, path, h, 1, sign=+1).solution
    um = wkb.exact_wkb_volterra(V, path, h, 1, sign=-1).solution
    y0 = up.y[0] + 2.0 * um.y[0]
    hdy0 = up.hdy[0] + 2.0 * um.hdy[0]
    u3 = wkb.ode_solution_on_path(V, h, path, y0, hdy0)
    c, spread = wkb.connection_coefficients(u3, up, um)
    np.testing.assert_allclose(c[0][1], 1.0, rtol=1e-6)
    np.testing.assert_allclose(c[0][2], 2.0, rtol=1e-6)
    assert spread < 1e-6
