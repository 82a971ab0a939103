import math
from fractions import Fraction

import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from seqtasep.kernel import phi_array, psi_array
from seqtasep.krawtchouk import (
    KrawtchoukContext,
    kraw,
    kraw_via_gf,
    phi_kraw_d2,
    phi_kraw_series,
    psi_kraw,
    s_inverse_d2,
    s_matrix,
    s_matrix_square,
)
from seqtasep.model import ModelParams


def gf_coefficients(x, p, T):
    """C(T, n) K_n(x) for n = 0..T from (1 - (1-p)/p w)^x (1+w)^(T-x), exact."""
    c = (1 - p) / p
    poly = [Fraction(1)]
    for _ in range(x):
        poly = [a - c * b for a, b in zip(poly + [0], [0] + poly)]
    for _ in range(T - x):
        poly = [a + b for a, b in zip(poly + [0], [0] + poly)]
    return poly


def test_context_validation_and_weight():
    ctx = KrawtchoukContext(0.3, 3, 2, 5)
    assert ctx.T == 9
    assert sum(ctx.weight(z) for z in range(-2, 12)) == pytest.approx(1.0, abs=1e-15)
    assert ctx.weight(-1) == 0 and ctx.weight(10) == 0
    for bad in [(0.0, 3, 2, 5), (0.5, 0, 2, 5), (0.5, 3, 1, 5), (0.5, 1, 2, 0)]:
        with pytest.raises(ValueError):
            KrawtchoukContext(*bad)


@pytest.mark.parametrize("p", [Fraction(1, 3), Fraction(1, 2), Fraction(3, 5)])
def test_low_degrees(p):
    T = 7
    for x in range(T + 1):
        assert kraw(0, x, p, T) == 1
        assert kraw(1, x, p, T) == 1 - Fraction(x) / (p * T)


@pytest.mark.parametrize("T", [1, 2, 4, 6])
@pytest.mark.parametrize("p", [Fraction(1, 4), Fraction(2, 3)])
def test_generating_function_coefficients(T, p):
    for x in range(T + 1):
        coeffs = gf_coefficients(x, p, T)
        for n in range(T + 1):
            assert math.comb(T, n) * kraw(n, x, p, T) == coeffs[n]


def test_orthogonality_exact():
    p, T = Fraction(2, 5), 8
    w = [math.comb(T, x) * p**x * (1 - p) ** (T - x) for x in range(T + 1)]
    for m in range(T + 1):
        for n in range(T + 1):
            s = sum(w[x] * kraw(m, x, p, T) * kraw(n, x, p, T) for x in range(T + 1))
            expected = ((1 - p) / p) ** n / math.comb(T, n) if m == n else 0
            assert s == expected


@pytest.mark.parametrize("n,z,T", [(0, 3, 6), (2, 0, 5), (3, 4, 9), (5, 7, 12)])
def test_contour_matches_series(n, z, T):
    p = 0.35
    ref = math.comb(T, n) * kraw(n, z, p, T)
    assert kraw_via_gf(n, z, p, T) == pytest.approx(ref, rel=1e-12, abs=1e-12)
    assert kraw_via_gf(n, z, p, T, radius=2.0) == pytest.approx(ref, rel=1e-11, abs=1e-11)


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("N,t", [(1, 4), (3, 7), (5, 12)])
def test_psi_kraw_matches_contour_psi(d, N, t):
    p = 0.45
    ctx = KrawtchoukContext(p, N, d, t)
    zs = np.arange(-2, ctx.T + 3)
    xs = zs - d * (N - 1)
    for k in range(N):
        ref = psi_array(N, k, xs, ModelParams(p, d, t))
        np.testing.assert_allclose([psi_kraw(k, int(z), ctx) for z in zs], ref, atol=1e-12)


@pytest.mark.parametrize("d", [2, 3])
def test_psi_in_weighted_basis(d):
    # Psi_k(z) = omega_T(z) sum_l S_{k,l} K_l(z, p, T)
    ctx = KrawtchoukContext(Fraction(2, 5), 3, d, 4)
    S = s_matrix(ctx)
    for k in range(ctx.N):
        for z in range(ctx.T + 1):
            rhs = ctx.weight(z) * sum(S[k, l] * kraw(l, z, ctx.p, ctx.T) for l in range(S.shape[1]))
            assert psi_kraw(k, z, ctx) == rhs


@pytest.mark.parametrize("N", [1, 2, 4, 6])
def test_s_inverse_exact(N):
    ctx = KrawtchoukContext(Fraction(3, 7), N, 2, 5)
    prod = s_matrix_square(ctx).dot(s_inverse_d2(ctx))
    assert all(prod[i, j] == (1 if i == j else 0) for i in range(N) for j in range(N))


@pytest.mark.parametrize("p", [0.3, 0.5, 0.7])
def test_s_inverse_float_against_lu(p):
    ctx = KrawtchoukContext(p, 6, 2, 9)
    S = s_matrix_square(ctx)
    inv = s_inverse_d2(ctx)
    np.testing.assert_allclose(S @ inv, np.eye(6), atol=1e-10)
    np.testing.assert_allclose(inv, np.linalg.inv(S), rtol=1e-9, atol=1e-12)


def test_s_inverse_only_d2():
    with pytest.raises(ValueError):
        s_inverse_d2(KrawtchoukContext(0.5, 3, 3, 4))
    with pytest.raises(ValueError):
        phi_kraw_d2(1, 0, KrawtchoukContext(0.5, 3, 3, 4))


@pytest.mark.parametrize("p", [0.3, 0.5, 0.7])
@pytest.mark.parametrize("N,t", [(3, 4), (5, 10)])
def test_phi_d2_biorthogonal(p, N, t):
    ctx = KrawtchoukContext(p, N, 2, t)
    zs = range(ctx.T + 1)
    for k in range(N):
        psi_k = np.array([psi_kraw(k, z, ctx) for z in zs])
        for j in range(N):
            phi_j = np.array([phi_kraw_d2(j, z, ctx) for z in zs])
            assert psi_k @ phi_j == pytest.approx(float(k == j), abs=1e-10)


def test_phi_d2_agrees_with_series_and_contour_phi():
    p, N, t = 0.4, 4, 6
    ctx = KrawtchoukContext(p, N, 2, t)
    params = ModelParams(p, 2, t)
    zs = np.arange(0, ctx.T + 4)
    for k in range(N):
        d2 = np.array([phi_kraw_d2(k, int(z), ctx) for z in zs])
        np.testing.assert_allclose(d2, [phi_kraw_series(k, int(z), ctx) for z in zs], atol=1e-10)
        np.testing.assert_allclose(d2, phi_array(N, k, zs - 2 * (N - 1), params), atol=1e-9)


def test_phi_d2_degree_and_constant():
    ctx = KrawtchoukContext(0.55, 5, 2, 8)
    zs = np.arange(0, 14)
    assert phi_kraw_d2(0, 3, ctx) == 1.0
    for k in range(1, 5):
        vals = np.array([phi_kraw_d2(k, int(z), ctx) for z in zs])
        fit = P.polyfit(zs, vals, k)
        np.testing.assert_allclose(P.polyval(zs, fit), vals, atol=1e-9)
        assert abs(fit[-1]) > 1e-8


def test_phi_d2_radius_guard():
    ctx = KrawtchoukContext(0.5, 3, 2, 4)
    assert phi_kraw_d2(2, 3, ctx, radius=1.5) == pytest.approx(phi_kraw_d2(2, 3, ctx), abs=1e-12)
    with pytest.raises(ValueError):
        phi_kraw_d2(2, 3, ctx, radius=2.5)
