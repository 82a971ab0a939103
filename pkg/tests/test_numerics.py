import math

import numpy as np
import pytest

from seqtasep.errors import NonConvergence
from seqtasep.numerics import (
    ComplexContour,
    SeededRng,
    contour_integral,
    contour_nodes,
    log_binomial,
    log_binomial_array,
    rng_uniform,
)

TWO_PI_I = 2j * np.pi


def test_nodes_unit_circle():
    nodes, weights = contour_nodes(ComplexContour(0, 1, 8))
    np.testing.assert_allclose(nodes, np.exp(2j * np.pi * np.arange(8) / 8), atol=1e-15)
    np.testing.assert_allclose(weights, TWO_PI_I / 8 * nodes, atol=1e-15)


def test_nodes_anticlockwise_shifted_center():
    c = ComplexContour(1 + 1j, 0.5, 16)
    nodes, _ = contour_nodes(c)
    ang = np.unwrap(np.angle(nodes - c.center))
    assert np.all(np.diff(ang) > 0)
    np.testing.assert_allclose(np.abs(nodes - c.center), 0.5)


@pytest.mark.parametrize("radius,m", [(0, 8), (-1, 8), (1, 12), (1, 4)])
def test_contour_validation(radius, m):
    with pytest.raises(ValueError):
        ComplexContour(0, radius, m)


def test_one_over_v_sum():
    nodes, weights = contour_nodes(ComplexContour(0, 0.5, 16))
    assert abs(np.sum(weights / nodes) - TWO_PI_I) < 1e-12


@pytest.mark.parametrize(
    "f,radius,expected",
    [
        (lambda v: 1 / v, 0.5, TWO_PI_I),
        (lambda v: np.exp(v) / v**2, 1.0, TWO_PI_I),
        (lambda v: v**3, 0.7, 0.0),
        (lambda v: v, 2.0, 0.0),
        (lambda v: 1 / (v - 2), 1.0, 0.0),
        (lambda v: np.cos(v) / v**3, 1.0, -0.5 * TWO_PI_I),
    ],
)
def test_contour_integral_residues(f, radius, expected):
    val, m = contour_integral(f, ComplexContour(0, radius), tol=1e-13)
    assert abs(val - expected) < 1e-12
    assert m >= 64


def test_contour_integral_vector_valued():
    ks = np.arange(5)
    val, _ = contour_integral(lambda v: np.exp(v)[None, :] / v[None, :] ** (ks[:, None] + 1), ComplexContour(0, 1))
    np.testing.assert_allclose(val / TWO_PI_I, [1 / math.factorial(k) for k in ks], atol=1e-13)


def test_geometric_convergence():
    # 1/(v-2) on the unit circle: the aliasing error of the m-node rule is 2^-m
    c = ComplexContour(0, 1, 8)
    errs = []
    for m in (8, 16, 32):
        nodes, weights = contour_nodes(c.with_nodes(m))
        errs.append(abs(np.sum(weights / (nodes - 2))))
    assert errs[1] <= 1.01 * errs[0] ** 2 * 2 ** 8
    assert errs[2] < errs[1] ** 1.5


def test_nonconvergence_cap():
    # pole right next to the circle
    with pytest.raises(NonConvergence):
        contour_integral(lambda v: 1 / (v - 1.0000001), ComplexContour(0, 1), tol=1e-14, max_nodes=1024)


@pytest.mark.parametrize("a,b,expected", [(5, 2, math.log(10)), (10, 0, 0.0), (7, 7, 0.0), (60, 30, math.log(math.comb(60, 30)))])
def test_log_binomial_values(a, b, expected):
    assert log_binomial(a, b) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("a,b", [(4, -1), (3, 5), (0, 1)])
def test_log_binomial_zero_flag(a, b):
    assert log_binomial(a, b) == -math.inf


def test_log_binomial_large_argument():
    v = log_binomial(10**7, 5 * 10**6)
    assert math.isfinite(v)
    # Stirling: ln C(2m, m) ~ 2m ln 2 - ln(pi m)/2
    m = 5 * 10**6
    assert v == pytest.approx(2 * m * math.log(2) - 0.5 * math.log(math.pi * m), abs=1e-6)


def test_log_binomial_pascal():
    # integers above 2^53 are not representable, so compare relative to exact integers
    for a in range(2, 61):
        for b in range(1, a):
            lhs = math.exp(log_binomial(a, b))
            rhs = math.exp(log_binomial(a - 1, b)) + math.exp(log_binomial(a - 1, b - 1))
            exact = math.comb(a - 1, b) + math.comb(a - 1, b - 1)
            assert abs(lhs - exact) <= 1e-12 * exact
            assert abs(rhs - exact) <= 1e-12 * exact
    for a in range(2, 31):
        for b in range(1, a):
            assert round(math.exp(log_binomial(a, b))) == math.comb(a, b)


def test_log_binomial_array_matches_scalar():
    a = np.array([5, 10, 3, 7, 20])
    b = np.array([2, -1, 5, 7, 4])
    expected = [log_binomial(int(x), int(y)) for x, y in zip(a, b)]
    np.testing.assert_allclose(log_binomial_array(a, b), expected)


def test_rng_reproducible():
    a = SeededRng(42, 3).uniforms(1000)
    b = SeededRng(42, 3).uniforms(1000)
    np.testing.assert_array_equal(a, b)
    r = SeededRng(42, 3)
    np.testing.assert_array_equal([rng_uniform(r) for _ in range(5)], a[:5])


def test_rng_streams_uncorrelated():
    a = SeededRng(7, 0).uniforms(100_000)
    b = SeededRng(7, 1).uniforms(100_000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.01
    assert not np.array_equal(a[:10], b[:10])


def test_rng_mean_and_range():
    u = SeededRng(123, 0).uniforms(1_000_000)
    assert np.all((u >= 0) & (u < 1))
    assert abs(u.mean() - 0.5) < 0.002
