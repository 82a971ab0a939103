"""Krawtchouk-polynomial representation of the finite-system functions.

With ``K_n(x, p, T) = 2F1(-n, -x; -T; 1/p)`` and the binomial weight
``omega_T(z) = (1-p)^T (p/(1-p))^z C(T, z)``, ``T = t + d(N-1)``, the
functions ``Psi^N_k`` of the system started from ``y_j = -d(j-1)`` read

    Psi_k(z) = (1-p)^t C(t+k, z-(d-1)k) (p/(1-p))^(z-(d-1)k) K_k(z-(d-1)k, p, t+k)
             = omega_T(z) sum_l S_{k,l} K_l(z, p, T),

where ``z = x + d(N-1)``. Inverting the square part of ``S`` gives the dual
polynomials ``Phi_k``; for ``d = 2`` the inverse, and a single contour integral
for ``Phi_k``, are explicit. Everything here is a cross-check of the contour
formulas in :mod:`seqtasep.kernel`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .numerics import ComplexContour, contour_integral

__all__ = [
    "KrawtchoukContext",
    "kraw",
    "kraw_via_gf",
    "psi_kraw",
    "s_matrix",
    "s_matrix_square",
    "s_inverse_d2",
    "phi_kraw_series",
    "phi_kraw_d2",
]

_TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class KrawtchoukContext:
    """Parameters of an ``N``-particle system observed at time ``t``.

    Attributes
    ----------
    p : float or Fraction
    N, d, t : int
    """

    p: float
    N: int
    d: int
    t: int

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ValueError("p must lie in (0, 1)")
        if self.N < 1 or self.d < 2 or self.t < 0:
            raise ValueError("need N >= 1, d >= 2, t >= 0")
        if self.T < 1:
            raise ValueError("T = t + d(N-1) must be >= 1")

    @property
    def T(self) -> int:
        return self.t + self.d * (self.N - 1)

    def weight(self, z: int):
        """``omega_T(z)``; zero outside ``0 <= z <= T``."""
        if not 0 <= z <= self.T:
            return 0 * self.p
        p = self.p
        return (1 - p) ** self.T * (p / (1 - p)) ** z * math.comb(self.T, z)


def kraw(n: int, x, p, T: int):
    """Krawtchouk polynomial ``K_n(x, p, T)`` as a terminating series.

    Exact when ``x`` is an integer and ``p`` a :class:`~fractions.Fraction`.

    Examples
    --------
    >>> kraw(1, 3, 0.5, 10)
    0.4
    """
    if not 0 <= n <= T:
        raise ValueError("need 0 <= n <= T")
    exact = isinstance(p, Fraction)
    one = Fraction(1) if exact else 1.0
    q = one / p
    term, total = one, one
    for j in range(n):
        # ratio of consecutive terms of 2F1(-n, -x; -T; 1/p)
        term = term * (j - n) * (j - x) / ((j - T) * (j + 1)) * q
        total = total + term
    return total


def kraw_via_gf(n: int, z: int, p: float, T: int, radius: float = 0.5, tol: float = 1e-13) -> float:
    """``C(T, n) K_n(z, p, T)`` from the generating-function contour integral.

    The numerator ``(1 - (1-p)/p zeta)^z (1+zeta)^(T-z)`` is a polynomial, so
    any radius works; 0.5 is used by default.
    """
    c = (1 - p) / p

    def f(zeta):
        return (1 - c * zeta) ** z * (1 + zeta) ** (T - z) / zeta ** (n + 1)

    val, _ = contour_integral(f, ComplexContour(0.0, radius), tol)
    return float(np.real(val / _TWO_PI_I))


def psi_kraw(k: int, z: int, ctx: KrawtchoukContext):
    """``Psi^N_k(z)`` through a single Krawtchouk polynomial.

    Vanishes when ``z - (d-1)k`` lies outside ``[0, t+k]``.
    """
    if not 0 <= k <= ctx.N - 1:
        raise ValueError("need 0 <= k <= N-1")
    p, t = ctx.p, ctx.t
    y = z - (ctx.d - 1) * k
    if not 0 <= y <= t + k:
        return 0 * p
    return (1 - p) ** t * math.comb(t + k, y) * (p / (1 - p)) ** y * kraw(k, y, p, t + k)


def s_matrix(ctx: KrawtchoukContext) -> np.ndarray:
    """Coefficients ``S_{k,l}``, ``0 <= k <= N-1``, ``0 <= l <= d(N-1)``, of
    ``Psi_k`` in the basis ``omega_T K_l``.

    Returns an object array of Fractions when ``p`` is a Fraction.
    """
    N, d, p = ctx.N, ctx.d, ctx.p
    exact = isinstance(p, Fraction)
    L = d * (N - 1) + 1
    xi = -(1 - p) / p
    S = np.empty((N, L), dtype=object if exact else float)
    for i in range(N):
        for j in range(L):
            s = 0
            for lam in range(0, min((d - 1) * i, j - i) + 1):
                s += math.comb((d - 1) * i, lam) * math.comb(d * (N - 1 - i), j - i - lam) * xi**lam
            S[i, j] = (p / (1 - p)) ** j / p**i * s
    return S


def s_matrix_square(ctx: KrawtchoukContext) -> np.ndarray:
    """The block ``0 <= i, j <= N-1`` of :func:`s_matrix`."""
    return s_matrix(ctx)[:, : ctx.N]


def _a_coeff(lam: int, i: int, j: int, N: int):
    if lam == j - i:
        return Fraction(1) if i == j == 0 else Fraction(i, 2 * j - i)
    return Fraction(2 * (j * (N - 1 - i) - lam * (N - 1)), (j + lam) * (2 * N - 2 - i - j - lam))


def s_inverse_d2(ctx: KrawtchoukContext) -> np.ndarray:
    """Closed-form inverse of :func:`s_matrix_square` for ``d = 2``.

    ``S = f(i) S~ g(j)`` with ``f(i) = p^-i`` and ``g(j) = (p/(1-p))^j``, so
    ``S^-1_{ij} = g(i)^-1 S~^-1_{ij} f(j)^-1``; ``S~^-1`` is upper triangular
    with coefficients ``A^(lambda)_{ij}``.
    """
    if ctx.d != 2:
        raise ValueError("the closed-form inverse is only available for d = 2")
    N, p = ctx.N, ctx.p
    exact = isinstance(p, Fraction)
    xi = (1 - p) / (-p)
    out = np.zeros((N, N), dtype=object if exact else float)
    if exact:
        out[:] = Fraction(0)
    for i in range(N):
        for j in range(i, N):
            s = 0
            for lam in range(0, j - i + 1):
                s += (
                    xi**lam
                    * math.comb(2 * N - 2 - i - j - lam, j - i - lam)
                    * math.comb(j + lam, lam)
                    * (_a_coeff(lam, i, j, N) if exact else float(_a_coeff(lam, i, j, N)))
                )
            out[i, j] = ((1 - p) / p) ** i * p**j * (-1) ** (j - i) * s
    return out


def phi_kraw_series(k: int, z, ctx: KrawtchoukContext, s_inv=None):
    """``Phi^N_k(z) = sum_l K_l(z, p, T) C(T, l) (p/(1-p))^l S^-1_{l,k}``.

    ``s_inv`` defaults to the closed form for ``d = 2`` and to a numerical
    inverse otherwise.
    """
    if s_inv is None:
        if ctx.d == 2:
            s_inv = s_inverse_d2(ctx)
        else:
            s_inv = np.linalg.inv(s_matrix_square(ctx).astype(float))
    p, T = ctx.p, ctx.T
    return sum(kraw(l, z, p, T) * math.comb(T, l) * (p / (1 - p)) ** l * s_inv[l, k] for l in range(ctx.N))


def phi_kraw_d2(k: int, z: int, ctx: KrawtchoukContext, radius: float = 0.5, tol: float = 1e-13) -> float:
    """``Phi^N_k(z)`` for ``d = 2`` from its single contour integral.

    ``Phi_0 = 1``; for ``k >= 1``

        Phi_k(z) = (-1)^k/(2 pi i) \\oint dv / v^(k+1)
                   (1-pv)^(t+2k-z-1) (1+(1-p)v)^(z-k-1) (1+(2-p)v)

    on a circle around 0 excluding ``1/p`` and ``-1/(1-p)``.
    """
    if ctx.d != 2:
        raise ValueError("phi_kraw_d2 requires d = 2")
    if not 0 <= k <= ctx.N - 1:
        raise ValueError("need 0 <= k <= N-1")
    if k == 0:
        return 1.0
    p, t = float(ctx.p), ctx.t
    if not 0 < radius < min(1 / p, 1 / (1 - p)):
        raise ValueError("radius must exclude the poles 1/p and -1/(1-p)")

    def f(v):
        return (
            (1 - p * v) ** (t + 2 * k - z - 1)
            * (1 + (1 - p) * v) ** (z - k - 1)
            * (1 + (2 - p) * v)
            / v ** (k + 1)
        )

    val, _ = contour_integral(f, ComplexContour(0.0, radius), tol)
    return float(np.real(val / _TWO_PI_I)) * (-1) ** k
