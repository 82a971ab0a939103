"""Airy function, extended Airy_1 kernel and Airy_1 distributions.

The Airy_1 process has the extended kernel

    K(u1,s1; u2,s2) = -exp(-(s2-s1)^2 / (4(u2-u1))) / sqrt(4 pi (u2-u1)) 1(u2>u1)
                      + Ai(s1+s2+(u2-u1)^2) exp((u2-u1)(s1+s2) + 2/3 (u2-u1)^3),

and ``P(A1(u_k) <= s_k, k=1..m) = det(1 - chi_s K chi_s)`` with ``chi_s``
projecting onto ``x > s_k`` in block ``k``. The one-point law is
``P(A1(0) <= s) = F1(2s)``, the GOE Tracy-Widom distribution.

Fredholm determinants are discretised by the Nystrom method with
Gauss-Legendre nodes on ``[s_k, s_k + L]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainTooLarge, NonConvergence

__all__ = [
    "airy_ai",
    "airy_ai_maclaurin",
    "airy_ai_asymptotic",
    "kernel_KF1",
    "Airy1Query",
    "f1_point",
    "joint_cdf_airy1",
    "stabilizer_log",
    "AI0",
    "AIP0",
]

AI0 = 3.0 ** (-2.0 / 3.0) / math.gamma(2.0 / 3.0)  # Ai(0)
AIP0 = -(3.0 ** (-1.0 / 3.0)) / math.gamma(1.0 / 3.0)  # Ai'(0)

_SERIES_NEG = -2.5  # Maclaurin series on [_SERIES_NEG, _SERIES_POS]
_SERIES_POS = 2.0
_ASYMP = 8.0  # asymptotic expansions for |x| > _ASYMP
_TABLE_STEP = 0.5
_TAYLOR_TERMS = 40


def _taylor(x0, y0, yp0, h, terms=_TAYLOR_TERMS):
    """Value and derivative at ``x0 + h`` of the solution of ``y'' = x y``
    with ``y(x0) = y0, y'(x0) = yp0`` from its Taylor series at ``x0``."""
    x0, h = np.broadcast_arrays(np.asarray(x0, float), np.asarray(h, float))
    y0 = np.broadcast_to(y0, x0.shape)
    yp0 = np.broadcast_to(yp0, x0.shape)
    coeffs = [y0.astype(float), yp0.astype(float)]
    val = coeffs[0] + coeffs[1] * h
    der = coeffs[1].copy()
    hp = h.copy()  # h^(n+1)
    for n in range(0, terms):
        # a_{n+2} = (x0 a_n + a_{n-1}) / ((n+2)(n+1))
        a_next = (x0 * coeffs[n] + (coeffs[n - 1] if n >= 1 else 0.0)) / ((n + 2) * (n + 1))
        coeffs.append(a_next)
        hpm = hp
        hp = hp * h
        val = val + a_next * hp
        der = der + (n + 2) * a_next * hpm
    return val, der


def _build_table():
    xs = [0.0]
    ai, aip = [AI0], [AIP0]
    x = 0.0
    lo = -_ASYMP - 2 * _TABLE_STEP
    while x > lo:
        v, dv = _taylor(x, ai[-1], aip[-1], -_TABLE_STEP)
        x -= _TABLE_STEP
        xs.append(x)
        ai.append(float(v))
        aip.append(float(dv))
    return np.array(xs), np.array(ai), np.array(aip)


_TAB_X, _TAB_AI, _TAB_AIP = _build_table()


def airy_ai_maclaurin(x):
    """Ai(x) from its Maclaurin series (accurate for moderate ``|x|``)."""
    x = np.asarray(x, float)
    v, _ = _taylor(np.zeros_like(x), AI0, AIP0, x, terms=120)
    return v


def _asym_coeffs(nmax=60):
    u = [1.0]
    for k in range(1, nmax):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k))
    return np.array(u)


_U = _asym_coeffs()


def airy_ai_asymptotic(x):
    """Ai(x) from the large-``|x|`` asymptotic expansions, optimally truncated.

    For ``x > 0``: ``e^{-zeta}/(2 sqrt(pi) x^(1/4)) sum (-1)^k u_k zeta^-k``;
    for ``x < 0`` the oscillatory pair of series in ``zeta = 2/3 |x|^(3/2)``.
    """
    x = np.asarray(x, float)
    out = np.empty_like(x)
    pos = x > 0
    for mask, sign in ((pos, 1), (~pos, -1)):
        if not np.any(mask):
            continue
        y = np.abs(x[mask])
        zeta = (2.0 / 3.0) * y**1.5
        k = np.arange(_U.size)
        terms = _U[None, :] / zeta[:, None] ** k[None, :]
        # optimal truncation: stop before terms start to grow
        grow = np.diff(np.abs(terms), axis=1) > 0
        last = np.where(grow.any(axis=1), grow.argmax(axis=1), _U.size - 1)
        keep = k[None, :] <= last[:, None]
        # alternating tail: add half of the first omitted term
        half = k[None, :] == last[:, None] + 1
        terms = np.where(keep, terms, np.where(half, 0.5 * terms, 0.0))
        if sign > 0:
            s = np.sum(terms * (-1.0) ** k[None, :], axis=1)
            out[mask] = np.exp(-zeta) / (2 * math.sqrt(math.pi) * y**0.25) * s
        else:
            even = np.sum(terms[:, 0::2] * (-1.0) ** np.arange(terms[:, 0::2].shape[1])[None, :], axis=1)
            odd = np.sum(terms[:, 1::2] * (-1.0) ** np.arange(terms[:, 1::2].shape[1])[None, :], axis=1)
            ph = zeta + math.pi / 4
            out[mask] = (np.sin(ph) * even - np.cos(ph) * odd) / (math.sqrt(math.pi) * y**0.25)
    return out


def _ai_bessel_k(x):
    """Ai(x) = sqrt(x/3)/pi K_{1/3}(zeta) for x > 0, with
    K_nu(zeta) = int_0^inf exp(-zeta cosh s) cosh(nu s) ds by the trapezoid rule."""
    zeta = (2.0 / 3.0) * x**1.5
    h = 0.2
    smax = np.arccosh(1.0 + 45.0 / np.min(zeta)) + h
    s = np.arange(0.0, smax + h, h)
    wts = np.full(s.size, h)
    wts[0] = h / 2
    f = np.exp(-zeta[:, None] * (np.cosh(s)[None, :] - 1.0)) * np.cosh(s / 3.0)[None, :]
    kk = f @ wts
    return np.sqrt(x / 3.0) / math.pi * np.exp(-zeta) * kk


def airy_ai(x):
    """Airy function Ai for real arguments.

    Parameters
    ----------
    x : float or array_like
        ``|x| <= 200``.

    Returns
    -------
    float or ndarray
        Relative accuracy about 1e-13 where ``|Ai| > 1e-280``.

    Notes
    -----
    Evaluation strategy by region:

    * ``-2.5 <= x <= 2``: Maclaurin series.
    * ``2 < x <= 8``: ``Ai(x) = sqrt(x/3) K_{1/3}(zeta)/pi`` with the
      Bessel integral on a trapezoid grid (no cancellation, unlike the
      series there).
    * ``-8 <= x < -2.5``: Taylor expansion of ``y'' = x y`` from a table of
      ``(Ai, Ai')`` built by stepping out from 0 (stable: solutions oscillate
      on the negative axis).
    * ``|x| > 8``: asymptotic expansions, optimally truncated.

    Raises
    ------
    DomainTooLarge
        If ``|x| > 200``.
    """
    arr = np.asarray(x, float)
    if np.any(np.abs(arr) > 200):
        raise DomainTooLarge("airy_ai supports |x| <= 200")
    flat = arr.ravel()
    out = np.empty_like(flat)
    ser = (flat >= _SERIES_NEG) & (flat <= _SERIES_POS)
    bes = (flat > _SERIES_POS) & (flat <= _ASYMP)
    tab = (flat < _SERIES_NEG) & (flat >= -_ASYMP)
    asy = np.abs(flat) > _ASYMP
    if ser.any():
        out[ser] = airy_ai_maclaurin(flat[ser])
    if bes.any():
        out[bes] = _ai_bessel_k(flat[bes])
    if tab.any():
        xt = flat[tab]
        j = np.rint(-xt / _TABLE_STEP).astype(int)
        x0 = _TAB_X[j]
        v, _ = _taylor(x0, _TAB_AI[j], _TAB_AIP[j], xt - x0)
        out[tab] = v
    if asy.any():
        out[asy] = airy_ai_asymptotic(flat[asy])
    out = out.reshape(arr.shape)
    return float(out) if np.ndim(x) == 0 else out


def kernel_KF1(u1, s1, u2, s2):
    """Extended Airy_1 kernel (broadcasts over array arguments)."""
    u1, s1, u2, s2 = np.broadcast_arrays(*(np.asarray(a, float) for a in (u1, s1, u2, s2)))
    du = u2 - u1
    ssum = s1 + s2
    val = airy_ai(ssum + du**2) * np.exp(du * ssum + (2.0 / 3.0) * du**3)
    later = du > 0
    if np.any(later):
        dl = np.where(later, du, 1.0)
        g = np.exp(-((s2 - s1) ** 2) / (4 * dl)) / np.sqrt(4 * math.pi * dl)
        val = val - np.where(later, g, 0.0)
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class Airy1Query:
    """Times ``u_1 < ... < u_m``, levels ``s_k`` and quadrature settings."""

    times: tuple
    levels: tuple
    n_q: int = 60
    L: float = 14.0

    def __post_init__(self):
        u = tuple(float(a) for a in self.times)
        s = tuple(float(a) for a in self.levels)
        object.__setattr__(self, "times", u)
        object.__setattr__(self, "levels", s)
        if not u or len(u) != len(s):
            raise ValueError("times and levels must be nonempty and of equal length")
        if any(b <= a for a, b in zip(u, u[1:])):
            raise ValueError("times must be strictly increasing")
        if self.n_q < 10 or not self.L > 0:
            raise ValueError("need n_q >= 10 and L > 0")


def stabilizer_log(k: int, x):
    """``log rho(u_k, x)`` with ``rho(u_k, x) = (1 + x^2)^(2k)``."""
    return 2 * k * np.log1p(np.asarray(x, float) ** 2)


def _nystrom_det(times, levels, n_q, L, stabilize):
    xi, wi = np.polynomial.legendre.leggauss(n_q)
    m = len(times)
    xs = [s + 0.5 * L * (xi + 1) for s in levels]
    ws = [0.5 * L * wi for _ in levels]
    M = np.empty((m * n_q, m * n_q))
    for k in range(m):
        for l in range(m):
            x = xs[k][:, None]
            y = xs[l][None, :]
            blk = kernel_KF1(times[k], x, times[l], y)
            if stabilize:
                blk = blk * np.exp(stabilizer_log(l + 1, y) - stabilizer_log(k + 1, x))
            blk = np.sqrt(ws[k])[:, None] * blk * np.sqrt(ws[l])[None, :]
            M[k * n_q : (k + 1) * n_q, l * n_q : (l + 1) * n_q] = blk
    sign, logdet = np.linalg.slogdet(np.eye(m * n_q) - M)
    return 0.0 if sign == 0 else float(sign * np.exp(logdet))


def f1_point(s: float, n_q: int = 60, L: float = 14.0, tol: float = 1e-6) -> float:
    """``P(A1(0) <= s) = F1(2s) = det(1 - Ai(x+y))`` on ``(s, inf)``.

    Computed at ``n_q`` and ``2 n_q`` Gauss-Legendre nodes on ``[s, s+L]``;
    the finer value is returned.

    Raises
    ------
    NonConvergence
        If the two resolutions differ by ``tol`` or more.
    """
    a = _nystrom_det((0.0,), (float(s),), n_q, L, False)
    b = _nystrom_det((0.0,), (float(s),), 2 * n_q, L, False)
    if abs(a - b) >= tol:
        raise NonConvergence(f"F1 quadrature unresolved at s={s}: {a} vs {b}")
    return b


def joint_cdf_airy1(query: Airy1Query, tol: float = 1e-5, full_output: bool = False):
    """``P(A1(u_k) <= s_k, k = 1..m)`` by block Nystrom quadrature.

    For ``m >= 2`` the entries of block ``(k, l)`` are multiplied by
    ``rho(u_l, y)/rho(u_k, x)``, a diagonal similarity that leaves the
    determinant unchanged and tames the cross-time terms.

    Returns
    -------
    probability : float
        Value at the doubled resolution.
    info : dict, only if ``full_output``
        ``resolutions`` and ``deltas``.

    Raises
    ------
    NonConvergence
        If doubling the resolution changes the value by ``tol`` or more.
    """
    stab = len(query.times) >= 2
    a = _nystrom_det(query.times, query.levels, query.n_q, query.L, stab)
    b = _nystrom_det(query.times, query.levels, 2 * query.n_q, query.L, stab)
    delta = abs(a - b)
    if delta >= tol:
        raise NonConvergence(f"Airy1 quadrature unresolved: {a} vs {b}")
    if full_output:
        return b, {"resolutions": [query.n_q, 2 * query.n_q], "deltas": [delta], "values": [a, b]}
    return b
