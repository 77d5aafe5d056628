"""Block factorizations, bordered systems, and the winding/trace determinant
calculus for holomorphic and finitely meromorphic matrix families.

Oracles: families built from planted eigenvalue factors, where every
multiplicity and winding number is known by construction.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reslab import grushin


def _random_block(rng, n, m):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    A += n * np.eye(n)  # keep P11 invertible
    B = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    C = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
    D = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    return grushin.BlockOperator(A, B, C, D)


def test_schur_factor_reassembles():
    rng = np.random.default_rng(5)
    B = _random_block(rng, 4, 2)
    L, Di, U = grushin.schur_factor(B)
    full = np.block([[B.P11, B.P12], [B.P21, B.P22]])
    np.testing.assert_allclose(L @ Di @ U, full, rtol=1e-11, atol=1e-11)
    # the middle factor is block diagonal with the Schur complement
    S = B.P22 - B.P21 @ np.linalg.solve(B.P11, B.P12)
    np.testing.assert_allclose(Di[4:, 4:], S, rtol=1e-11)
    np.testing.assert_allclose(Di[:4, 4:], 0.0, atol=1e-13)


def test_schur_identities_on_random_blocks():
    rng = np.random.default_rng(17)
    for _ in range(5):
        B = _random_block(rng, 5, 3)
        rep = grushin.schur_identities(B)
        assert all(bool(v) for v in rep.values()), rep


def test_determinant_product_rule():
    # det(full) = det(P11) det(S): the factorization's determinant content
    rng = np.random.default_rng(23)
    B = _random_block(rng, 3, 2)
    full = np.block([[B.P11, B.P12], [B.P21, B.P22]])
    S = B.P22 - B.P21 @ np.linalg.solve(B.P11, B.P12)
    np.testing.assert_allclose(np.linalg.det(full),
                               np.linalg.det(B.P11) * np.linalg.det(S),
                               rtol=1e-10)


def _planted_family(vals, mults, dim, seed):
    """U(z) = Q(zI - M)Q*: eigenvalues `vals` with multiplicities `mults`."""
    rng = np.random.default_rng(seed)
    diag = np.concatenate([np.full(m, v) for v, m in zip(vals, mults)])
    pad = dim - len(diag)
    diag = np.concatenate([diag, 3.0 + rng.standard_normal(pad)
                           + 1j * rng.standard_normal(pad)])
    T = np.diag(diag) + 0.4 * np.triu(
        rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)), 1)
    Q, _ = np.linalg.qr(rng.standard_normal((dim, dim))
                        + 1j * rng.standard_normal((dim, dim)))
    M = Q @ T @ Q.conj().T
    return lambda z: z * np.eye(dim) - M


def test_border_produces_invertible_system():
    fam = _planted_family([0.2 - 0.1j], [2], 5, seed=1)
    sys = grushin.border(fam, 0.2 - 0.1j)
    assert sys.rank == 2
    full = np.block([[fam(sys.z0), sys.R_minus],
                     [sys.R_plus, np.zeros((2, 2))]])
    assert np.linalg.cond(full) < 1e6  # bordering restored invertibility
    assert np.linalg.cond(fam(sys.z0)) > 1e12


def test_multiplicity_at_matches_planted():
    for mult in (1, 2, 3):
        z0 = 0.3 + 0.2j
        fam = _planted_family([z0], [mult], 6, seed=mult)
        sys = grushin.border(fam, z0)
        got = grushin.multiplicity_at(sys, z0, 0.15)
        assert got == mult


def test_circle_winding_exact_integers():
    a, b, c = 0.0, 0.9, 0.5 - 0.5j
    f = lambda z: (z - a) ** 2 * (z - b) / (z - c)
    assert grushin.circle_winding(f, a, 0.2) == 2
    assert grushin.circle_winding(f, 0.3, 1.2) == 2 + 1 - 1
    assert grushin.circle_winding(f, b, 0.05) == 1


def test_det_winding_matches_planted_multiplicities():
    z0 = -0.4 + 0.1j
    fam = _planted_family([z0, 1.5], [3, 1], 7, seed=9)
    assert grushin.det_winding(fam, z0, 0.3) == 3
    assert grushin.det_winding(fam, 1.5, 0.2) == 1
    # a circle containing both
    assert grushin.det_winding(fam, 0.5, 3.0) == 4


def test_winding_additivity_exact():
    rng = np.random.default_rng(31)
    for seed in range(4):
        fam_a = _planted_family([0.1], [rng.integers(1, 3)], 5, seed=seed)
        fam_b = _planted_family([0.1 + 0.05j], [rng.integers(1, 3)], 5,
                                seed=seed + 100)
        na, nb, nab = grushin.winding_additivity(fam_a, fam_b, 0.1, 0.4)
        assert na + nb == nab


def test_meromorphic_multiplicity_zeros_minus_poles():
    # scalar family (z-a)(z-b)/(z-p): two zeros and one pole inside
    a, b, p = 0.1, -0.2 + 0.1j, 0.05 - 0.15j
    holo = lambda z: np.array([[(z - a) * (z - b)]])
    # pole supplied as (location, residue-rank) data understood by the API:
    # build the family with an explicit simple pole
    fam = lambda z: np.array([[(z - a) * (z - b) / (z - p)]])
    got = grushin.meromorphic_multiplicity([p], fam, 0.0, 0.5)
    assert got == 2 - 1


def test_dz_derivatives_spectral_accuracy():
    A = np.array([[1.0, 0.5], [0.0, 2.0]])
    f = lambda z: np.exp(2.0 * z) * (np.eye(2) + z * A)
    z = 0.3 + 0.1j
    d = grushin.dz_derivatives(f, z, 3)
    e = np.exp(2.0 * z)
    want1 = 2.0 * e * (np.eye(2) + z * A) + e * A
    want2 = 4.0 * e * (np.eye(2) + z * A) + 4.0 * e * A
    want3 = 8.0 * e * (np.eye(2) + z * A) + 12.0 * e * A
    np.testing.assert_allclose(d[0], want1, rtol=1e-10)
    np.testing.assert_allclose(d[1], want2, rtol=1e-10)
    np.testing.assert_allclose(d[2], want3, rtol=1e-9)


def test_logdet_trace_closed_form():
    Q = np.array([[2.0, 1.0], [0.5, 3.0]])
    fam = lambda z: (z - 0.7) * Q
    # tr(P^-1 P') = dim / (z - a) for P = (z-a) Q
    z = 1.4 + 0.3j
    np.testing.assert_allclose(grushin.logdet_trace(fam, z), 2.0 / (z - 0.7),
                               rtol=1e-9)


def test_logdet_via_traces_matches_direct():
    rng = np.random.default_rng(41)
    dim = 4
    B0 = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    B1 = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    fam = lambda z: 5.0 * np.eye(dim) + z * B0 + z**2 / 8.0 * B1
    grid = np.linspace(-0.6, 0.6, 41)
    for order in (1, 2):
        got = grushin.logdet_via_traces(fam, grid, order=order)
        want = np.array([np.log(np.abs(np.linalg.det(fam(z)))) for z in grid])
        np.testing.assert_allclose(got, want, atol=1e-7)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_schur_identities_property(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    m = int(rng.integers(1, 4))
    B = _random_block(rng, n, m)
    rep = grushin.schur_identities(B)
    assert all(bool(v) for v in rep.values())
