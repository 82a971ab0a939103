import itertools
import math

import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from seqtasep.kernel import (
    ConjugationWeights,
    KernelPoint,
    binomial_part,
    conjugate_kernel,
    f_n,
    green_function,
    kernel_K,
    kernel_K_d2,
    kernel_finite,
    kernel_matrix,
    phi,
    phi_array,
    psi,
    psi_array,
)
from seqtasep.fredholm import joint_cdf
from seqtasep.model import JointQuery, ModelParams
from seqtasep.scaling import constants, scaling_points
from seqtasep.simulator import exact_distribution


def psi_poly_oracle(n, k, x, p, d, t):
    """(-1)^k [w^z] (1-p+pw)^t ((w-1) w^(d-1))^k for k >= 0."""
    z = x + d * (n - 1)
    c = P.polypow([1 - p, p], t)
    fac = P.polymul([-1, 1], np.eye(1, d, d - 1)[0])  # (w-1) w^(d-1)
    c = P.polymul(c, P.polypow(fac, k))
    val = c[z] if 0 <= z < len(c) else 0.0
    return (-1) ** k * val


# --- F_n ------------------------------------------------------------------


def test_f0_binomial_pmf():
    np.testing.assert_allclose(f_n(0, np.arange(-1, 4), ModelParams(0.5, 2, 2)), [0, 0.25, 0.5, 0.25, 0], atol=1e-15)


def test_f_small_values():
    params = ModelParams(0.5, 2, 1)
    assert f_n(-1, 0, params) == pytest.approx(0.0, abs=1e-15)
    assert f_n(1, 0, params) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("p", [0.3, 0.5, 0.7])
@pytest.mark.parametrize("n", [-3, -1, 0, 1, 2, 3])
def test_f_recurrences(n, p):
    xs = np.arange(-6, 15)
    for t in range(0, 20, 3):
        a = ModelParams(p, 2, t)
        b = ModelParams(p, 2, t + 1)
        np.testing.assert_allclose(f_n(n, xs, b), (1 - p) * f_n(n, xs, a) + p * f_n(n, xs - 1, a), atol=1e-12)
        np.testing.assert_allclose(f_n(n - 1, xs, a), f_n(n, xs, a) - f_n(n, xs + 1, a), atol=1e-12)


def test_f1_tail_sum():
    params = ModelParams(0.4, 2, 9)
    ys = np.arange(0, 10)
    pmf = f_n(0, ys, params)
    for x in range(0, 10):
        assert f_n(1, x, params) == pytest.approx(pmf[x:].sum(), abs=1e-13)


# --- Green function -----------------------------------------------------------


def test_green_one_particle():
    params = ModelParams(0.4, 3, 5)
    for x in range(-1, 7):
        assert green_function([0], [x], params) == pytest.approx(f_n(0, x, params), abs=1e-15)


def test_green_example_and_leftward():
    params = ModelParams(0.5, 2, 1)
    assert green_function([0, -2], [1, -1], params) == pytest.approx(0.25, abs=1e-14)
    assert green_function([0, -2], [1, -3], params) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("d,t", [(2, 3), (3, 4)])
def test_green_matches_enumeration(d, t):
    params = ModelParams(0.45, d, t)
    dist = exact_distribution(params, 3, ghosts=0)
    for conf, prob in dist.items():
        assert green_function([0, -d, -2 * d], conf, params) == pytest.approx(prob, abs=1e-13)


# --- Psi / Phi --------------------------------------------------------------


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("n,k", [(1, 0), (3, 1), (4, 3), (5, 2)])
def test_psi_polynomial_oracle(d, n, k):
    p, t = 0.35, 9
    params = ModelParams(p, d, t)
    xs = np.arange(-d * (n - 1) - 2, t + 3)
    expected = [psi_poly_oracle(n, k, int(x), p, d, t) for x in xs]
    np.testing.assert_allclose(psi_array(n, k, xs, params), expected, atol=1e-14)


def test_psi0_is_f0_and_support():
    params = ModelParams(0.5, 3, 6)
    for x in range(-10, 8):
        assert psi(3, 0, x, params) == pytest.approx(f_n(0, x + 6, params), abs=1e-15)
    assert psi(3, 2, -7, params) == 0.0


@pytest.mark.parametrize("d", [2, 3])
def test_psi_sums(d):
    params = ModelParams(0.6, d, 7)
    n = 4
    xs = np.arange(-d * (n - 1), params.t + 1)
    for j in range(n):
        assert psi_array(n, j, xs, params).sum() == pytest.approx(1.0 if j == 0 else 0.0, abs=1e-12)


def test_biorthogonality_example():
    params = ModelParams(0.5, 2, 8)
    n = 3
    xs = np.arange(-2 * (n - 1), 9)
    G = np.array([[psi_array(n, k, xs, params) @ phi_array(n, j, xs, params) for j in range(n)] for k in range(n)])
    np.testing.assert_allclose(G, np.eye(n), atol=1e-10)


def test_phi0_is_one():
    params = ModelParams(0.3, 3, 5)
    np.testing.assert_allclose(phi_array(4, 0, np.arange(-9, 6), params), 1.0)


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_phi_degree(d, k):
    params = ModelParams(0.45, d, 6)
    xs = np.arange(-8, 12)
    vals = phi_array(5, k, xs, params)
    dk1 = np.diff(vals, k + 1)
    scale = np.abs(vals).max()
    assert np.abs(dk1).max() < 1e-8 * max(1.0, scale)
    assert np.abs(np.diff(vals, k)).max() > 1e-6  # degree exactly k


# --- binomial part, composition ---------------------------------------------


@pytest.mark.parametrize("n", [-2, 0, 1, 4])
@pytest.mark.parametrize("p", [0.3, 0.7])
def test_f_exact_matches_contour(n, p):
    params = ModelParams(p, 2, 40)
    xs = np.arange(-10, 50)
    exact = f_n(n, xs, params, method="exact")
    contour = f_n(n, xs, params, method="contour")
    np.testing.assert_allclose(exact, contour, rtol=1e-11, atol=1e-13)
    np.testing.assert_array_equal(f_n(n, xs, params), exact)


def test_f_unknown_method():
    with pytest.raises(ValueError):
        f_n(1, 0, ModelParams(0.5, 2, 3), method="bogus")


def phi_contour_oracle(n, k, x, p, d, t, r=0.25, m=256):
    """Trapezoid rule on |v| = r for the defining residue at v = 0."""
    v = r * np.exp(2j * np.pi * np.arange(m) / m)
    z = x + d * (n - 1)
    g = (1 + d * v) / (1 + p * v) ** t * (1 + v) ** (z - 1) / (v * (1 + v) ** (d - 1)) ** k
    return (-1) ** k * np.real(np.mean(g))


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("k", [1, 2, 4])
def test_phi_matches_contour_oracle(d, k):
    p, n, t = 0.6, 5, 9
    params = ModelParams(p, d, t)
    xs = np.arange(-d * (n - 1), t + 1)
    got = phi_array(n, k, xs, params)
    want = [phi_contour_oracle(n, k, int(x), p, d, t) for x in xs]
    np.testing.assert_allclose(got, want, rtol=1e-10, atol=1e-10)


@pytest.mark.parametrize(
    "n1,x1,n2,x2,expected",
    [(3, 0, 3, -5, 0.0), (4, 0, 2, 0, 0.0), (2, 3, 3, 1, 1.0), (2, 1, 3, 1, 0.0), (1, 5, 3, 0, 4.0), (1, 0, 4, 0, 0.0)],
)
def test_binomial_part(n1, x1, n2, x2, expected):
    assert binomial_part(KernelPoint(n1, x1, n2, x2, ModelParams(0.5, 2, 3))) == expected


@pytest.mark.parametrize("d", [2, 3])
def test_composition_rule(d):
    params = ModelParams(0.5, d, 6)
    n = 3
    for j in range(1, n + 2):
        ys = np.arange(-d * n, 30)
        lhs_terms = psi_array(n + 1, n + 1 - j, ys, params)
        for x in range(-d * n, 10):
            lhs = lhs_terms[ys < x].sum()
            assert lhs == pytest.approx(psi(n, n - j, x, params), abs=1e-10)


# --- kernel ------------------------------------------------------------------


def _random_points(count, seed, d=2, tmax=64):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        t = int(rng.integers(1, tmax + 1))
        p = float(rng.uniform(0.15, 0.85))
        n1, n2 = (int(v) for v in rng.integers(1, 10, 2))
        c = int(round(p * t / 2 - 2 * n1))
        x1, x2 = (int(c + v) for v in rng.integers(-6, 7, 2))
        yield KernelPoint(n1, x1, n2, x2, ModelParams(p, d, t))


@pytest.mark.parametrize("pt", list(_random_points(12, 3)))
def test_d2_matches_roots(pt):
    ref = kernel_K_d2(pt)
    assert abs(kernel_K(pt) - ref) / (1 + abs(ref)) < 1e-10


@pytest.mark.parametrize("d", [2, 3, 4])
def test_shift_invariance(d):
    params = ModelParams(0.45, d, 10)
    base = KernelPoint(4, 2, 6, -3, params)
    ref = kernel_K(base)
    for S in (-2, -1, 1, 2):
        shifted = KernelPoint(4 + S, 2 - d * S, 6 + S, -3 - d * S, params)
        assert kernel_K(shifted) == pytest.approx(ref, abs=1e-10)


def test_literal_shift_is_not_invariant():
    params = ModelParams(0.5, 2, 10)
    a = kernel_K(KernelPoint(4, 2, 6, -3, params))
    b = kernel_K(KernelPoint(5, 4, 7, -1, params))
    assert abs(a - b) > 1e-3


def test_conjugation_identity_on_diagonal():
    params = ModelParams(0.5, 3, 8)
    pt = KernelPoint(3, 1, 3, 1, params)
    assert conjugate_kernel(pt) == pytest.approx(kernel_K(pt), abs=1e-12)
    assert ConjugationWeights(3).log_factor(3, 1, 3, 1) == 0.0


def test_conjugation_factor_value():
    d, (n1, x1, n2, x2) = 3, (2, 1, 4, -3)
    pt = KernelPoint(n1, x1, n2, x2, ModelParams(0.4, d, 9))
    fac = (d / (d - 1)) ** (x2 + d * n2 - x1 - d * n1) * (d**d / (d - 1) ** (d - 1)) ** (n1 - n2)
    assert conjugate_kernel(pt) == pytest.approx(fac * kernel_K(pt), rel=1e-10, abs=1e-12)


def test_conjugate_bounded_at_scaling_points():
    frame = constants(0.5, 2)
    t = 1000
    params = ModelParams(0.5, 2, t)
    scale = frame.kappa * t ** (1 / 3)
    for s1, s2 in itertools.product([-2, -1, 0, 1, 2], repeat=2):
        n1, x1 = scaling_points(0.0, s1, t, frame)
        n2, x2 = scaling_points(0.0, s2, t, frame)
        assert abs(conjugate_kernel(KernelPoint(n1, x1, n2, x2, params))) * scale <= 10


def test_kernel_is_real():
    params = ModelParams(0.3, 3, 15)
    _, info = kernel_matrix(params, 2, np.arange(-8, 4), 4, np.arange(-10, 2), method="roots")
    assert info["imag_residual"] < 1e-8


@pytest.mark.parametrize("radius,tol", [(0.5, 1e-13), (0.9, 1e-12), (1.5, 1e-8)])
def test_d2_radius_independence(radius, tol):
    params = ModelParams(0.5, 2, 12)
    pt = KernelPoint(3, 0, 4, -1, params)
    assert kernel_K_d2(pt, radius=radius) == pytest.approx(kernel_K_d2(pt, radius=None), abs=tol)


def test_d2_radius_near_pole_reports_roundoff():
    # 1.9 < 1/p is admissible, but the circle passes 0.1 from the pole at -2
    params = ModelParams(0.5, 2, 12)
    ref = kernel_K_d2(KernelPoint(3, 0, 4, -1, params))
    val, info = kernel_matrix(params, 3, [0], 4, [-1], conjugate=False, method="d2", radius=1.9)
    assert abs(val[0, 0] - ref) <= info["roundoff"]


@pytest.mark.parametrize("method,radius", [("d2", 2.1), ("roots", 1 / 2 + 0.01), ("d2", 0.0)])
def test_radius_guard(method, radius):
    params = ModelParams(0.5, 2, 5)
    with pytest.raises(ValueError):
        kernel_matrix(params, 1, [0], 2, [-1], method=method, radius=radius)


def test_d2_radius_guard_negative_exponent():
    # x2 + n1 + n2 - 2 < 0: the pole at v = -1 forbids radii beyond 1
    with pytest.raises(ValueError):
        kernel_matrix(ModelParams(0.5, 2, 5), 1, [0], 1, [-5], method="d2", radius=1.5)


def test_half_line_kernel_differs_from_full():
    params = ModelParams(0.5, 2, 2)
    # P(x_1(2) >= 2) is p^2 for a free leader and p^3 (2 - p) in 2Z
    q = JointQuery((1,), (2,))
    assert joint_cdf(q, params, system="half")[0] == pytest.approx(0.25, abs=1e-12)
    assert joint_cdf(q, params, system="full")[0] == pytest.approx(0.1875, abs=1e-12)
    pt = KernelPoint(1, 2, 1, 2, params)
    assert abs(kernel_finite(pt) - kernel_K(pt)) > 0.1


def test_matrix_block_matches_scalar():
    params = ModelParams(0.4, 3, 10)
    xs1, xs2 = np.arange(-5, 0), np.arange(-8, -4)
    mat, _ = kernel_matrix(params, 2, xs1, 3, xs2, conjugate=False, method="roots")
    for i, j in [(0, 0), (2, 3), (4, 1)]:
        assert mat[i, j] == pytest.approx(kernel_K(KernelPoint(2, int(xs1[i]), 3, int(xs2[j]), params)), abs=1e-12)


def test_log_domain_no_overflow():
    params = ModelParams(0.5, 2, 5000)
    frame = constants(0.5, 2)
    n1, x1 = scaling_points(0.0, 0.0, 5000, frame)
    val = conjugate_kernel(KernelPoint(n1, x1, n1, x1, params))
    assert math.isfinite(val)
