"""Chebyshev-Lobatto collocation primitives: nodes, quadrature,
differentiation, and complex segments.

Oracles: exact calculus on polynomials and elementary functions.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import polynomial as P

from reslab import cheb


def test_lobatto_nodes_basics():
    for n in (2, 5, 16, 33):
        t = cheb.lobatto_nodes(n)
        assert t.shape == (n + 1,)
        assert t[0] == -1.0 and t[-1] == 1.0
        assert np.all(np.diff(t) > 0)
        # symmetric set
        np.testing.assert_allclose(t + t[::-1], 0.0, atol=1e-15)


def test_lobatto_weights_integrate_polynomials_exactly():
    # Clenshaw-Curtis on lobatto_nodes(n) integrates degree <= n exactly
    n = 12
    t = cheb.lobatto_nodes(n)
    w = cheb.lobatto_weights(n)
    assert w.shape == (n + 1,)
    assert np.all(w > 0)
    for k in range(n + 1):
        exact = (1.0 - (-1.0) ** (k + 1)) / (k + 1)  # int_{-1}^{1} x^k dx
        np.testing.assert_allclose(w @ t**k, exact, atol=5e-14)


def test_weights_sum_to_interval_length():
    for n in (3, 9, 40):
        np.testing.assert_allclose(cheb.lobatto_weights(n).sum(), 2.0, rtol=1e-14)


def test_diffmat_exact_on_polynomials():
    n = 14
    t = cheb.lobatto_nodes(n)
    D = cheb.diffmat(n)
    rng = np.random.default_rng(3)
    c = rng.standard_normal(n + 1)  # degree n: still differentiated exactly
    np.testing.assert_allclose(D @ P.polyval(t, c), P.polyval(t, P.polyder(c)),
                               atol=1e-10)
    # constants differentiate to zero
    np.testing.assert_allclose(D @ np.ones(n + 1), 0.0, atol=1e-11)


def test_vals_coeffs_round_trip():
    rng = np.random.default_rng(11)
    for n in (4, 17, 64):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        np.testing.assert_allclose(cheb.coeffs_to_vals(cheb.vals_to_coeffs(v)),
                                   v, atol=1e-12)


def test_vals_to_coeffs_picks_out_chebyshev_modes():
    n = 16
    t = cheb.lobatto_nodes(n)
    for k in (0, 3, 7):
        v = np.cos(k * np.arccos(np.clip(t, -1, 1)))  # T_k on the nodes
        a = cheb.vals_to_coeffs(v.astype(complex))
        e = np.zeros(n + 1)
        e[k] = 1.0
        np.testing.assert_allclose(a, e, atol=1e-12)


def test_antiderivative_vals_on_polynomials():
    n = 18
    t = cheb.lobatto_nodes(n)
    c = np.array([0.3, -1.0, 2.5, 0.0, 1.2])
    ci = P.polyint(c)
    got = cheb.antiderivative_vals((P.polyval(t, c)).astype(complex))
    exact = P.polyval(t, ci) - P.polyval(-1.0, ci)
    np.testing.assert_allclose(got, exact, atol=1e-12)


def test_antiderivative_halfwidth_scaling():
    n = 20
    v = np.cos(cheb.lobatto_nodes(n)).astype(complex)
    np.testing.assert_allclose(cheb.antiderivative_vals(v, halfwidth=2.5),
                               2.5 * cheb.antiderivative_vals(v), rtol=1e-13)


def test_segment_geometry():
    seg = cheb.Segment(1.0 - 2.0j, 3.0 + 1.0j, 25)
    assert seg.nodes[0] == seg.z_start and seg.nodes[-1] == seg.z_end
    np.testing.assert_allclose(seg.weights.sum(), seg.z_end - seg.z_start,
                               rtol=1e-14)
    # physical-coordinate differentiation: d/dz z^2 = 2z
    np.testing.assert_allclose(seg.D @ seg.nodes**2, 2 * seg.nodes, atol=1e-10)


def test_segment_integrate_from_start_complex_path():
    # int_{z0}^{z} exp(w) dw = exp(z) - exp(z0), path independent
    seg = cheb.Segment(0.0, 1.0 + 1.0j, 30)
    got = seg.integrate_from_start(np.exp(seg.nodes))
    np.testing.assert_allclose(got, np.exp(seg.nodes) - np.exp(seg.z_start),
                               atol=1e-13)


def test_segment_quadrature_matches_line_integral():
    # int_gamma z^3 dz along a slanted segment
    seg = cheb.Segment(-1.0 + 0.5j, 2.0 - 1.0j, 22)
    exact = (seg.z_end**4 - seg.z_start**4) / 4.0
    np.testing.assert_allclose(seg.weights @ seg.nodes**3, exact, rtol=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10))
def test_diffmat_monomials_property(k):
    n = 14
    t = cheb.lobatto_nodes(n)
    D = cheb.diffmat(n)
    want = np.zeros(n + 1) if k == 0 else k * t ** (k - 1)
    np.testing.assert_allclose(D @ t**k, want, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=9))
def test_quadrature_odd_even_property(k):
    # odd monomials integrate to exactly zero by weight symmetry
    n = 12
    t = cheb.lobatto_nodes(n)
    w = cheb.lobatto_weights(n)
    val = w @ t**k
    if k % 2 == 1:
        assert abs(val) < 1e-15
    else:
        np.testing.assert_allclose(val, 2.0 / (k + 1), atol=5e-14)
