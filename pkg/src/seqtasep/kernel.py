"""Finite-time correlation kernel for the periodic initial condition.

Notation: ``p`` hop probability, ``d`` period, ``t`` time; particle ``n``
starts at ``-d(n-1)`` and ``z = x + d(n-1)``.

The kernel of the system with particles on all of ``dZ`` is

    K(n1,x1; n2,x2) = -C(x1-x2-1, n2-n1-1) + K0,

    K0 = 1/(2 pi i) \\oint dv  sum_{i=1}^{d-1}
         (1+dv)/(1+d u_i) * (1+p u_i)^t/(1+pv)^t * (-u_i)^n1/(-v)^n2
         * (1+v)^(x2+n2-2) / (1+u_i)^(x1+n1-1),

where ``u_1(v), ..., u_{d-1}(v)`` are the nontrivial roots of
``u(1+u)^(d-1) = v(1+v)^(d-1)`` and the ``v`` contour is a small circle
around 0 (radius below ``1/d``). For ``d = 2`` the single root is
``u = -1-v`` and

    K0 = -1/(2 pi i) \\oint dv (1+v)^(x2+n1+n2-2) / (-v)^(x1+n1+n2-1)
         * ((1-p-pv)/(1+pv))^t .

The system with only particles ``1..N`` present is described instead by
the biorthogonal functions ``Psi`` and ``Phi`` (:func:`kernel_finite`).

All powers are evaluated as ``exp(k log(.))`` with integer ``k``, so the
branch of the logarithm is irrelevant. Kernel blocks are computed as matrix
products over the quadrature nodes, which gives every entry of a block from
one set of node evaluations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonConvergence, ResidualImaginary
from .model import ModelParams
from .numerics import ComplexContour, DEFAULT_MAX_NODES, contour_integral, log_binomial, log_binomial_array
from .roots import offspring_roots_batch

__all__ = [
    "KernelPoint",
    "ConjugationWeights",
    "f_n",
    "green_function",
    "psi",
    "psi_array",
    "phi",
    "phi_array",
    "binomial_part",
    "kernel_matrix",
    "kernel_K",
    "kernel_K_d2",
    "conjugate_kernel",
    "kernel_finite",
    "kernel_finite_matrix",
    "default_radius",
]

TWO_PI_I = 2j * np.pi
IMAG_TOL = 1e-8


@dataclass(frozen=True)
class KernelPoint:
    """Arguments ``(n1, x1; n2, x2)`` of the kernel and the model parameters."""

    n1: int
    x1: int
    n2: int
    x2: int
    params: ModelParams

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("particle indices must be >= 1")


@dataclass(frozen=True)
class ConjugationWeights:
    """Gauge factor ``(d/(d-1))^(x2+d n2-x1-d n1) * (d^d/(d-1)^(d-1))^(n1-n2)``.

    Multiplying the kernel by this factor leaves all its determinants
    unchanged and keeps the entries of order one near the bulk.
    """

    d: int

    @property
    def log_ratio(self) -> float:
        return math.log(self.d / (self.d - 1))

    @property
    def log_level(self) -> float:
        d = self.d
        return d * math.log(d) - (d - 1) * math.log(d - 1)

    def log_factor(self, n1, x1, n2, x2):
        d = self.d
        return (x2 + d * n2 - x1 - d * n1) * self.log_ratio + (n1 - n2) * self.log_level


# ---------------------------------------------------------------------------
# one-particle functions


_F_GRID = np.exp(np.linspace(np.log(0.02), np.log(50.0), 241))


def _f_n_radius(n, x, p, t):
    """Radius minimising the Cauchy bound of the ``F_n`` integrand.

    The integrand is analytic away from ``w = 0`` and ``w = 1``, so any
    circle enclosing 0 (and 1 when ``n >= 1``) is admissible.
    """
    c = p / (1 - p)
    if n >= 1:
        r = _F_GRID[_F_GRID > 1.05]
        dist = np.log(r - 1)
    else:
        r = _F_GRID
        dist = np.log1p(r)
    logb = t * np.log1p(c * r) - n * dist + (n - x) * np.log(r)
    return float(r[np.argmin(logb)])


# above this time the integer sums get long; the contour is used instead
EXACT_F_MAX_T = 256


def _f_n_exact(n, xs, p, t):
    """``F_n(x, t)`` from finite sums in integer arithmetic, correctly rounded.

    A double ``p`` is a dyadic rational ``m / 2^e``, so ``2^(e t) F_0(y, t) =
    C(t, y) m^y (2^e - m)^(t-y)`` is an integer. For ``n >= 1``, ``F_n(x) =
    sum_{x <= y <= t} C(y-x+n-1, n-1) F_0(y)`` (iterated tail sums; ``F_n``
    vanishes for ``x > t``), and for ``n = -m <= 0``, ``F_n(x) = sum_j (-1)^j
    C(m, j) F_0(x+j)``.
    """
    m, den = float(p).as_integer_ratio()
    e = den.bit_length() - 1
    scale = 1 << (e * t)
    f0 = [math.comb(t, y) * m**y * (den - m) ** (t - y) for y in range(t + 1)]

    def f0_at(y):
        return f0[y] if 0 <= y <= t else 0

    out = np.empty(len(xs))
    for i, x in enumerate(int(v) for v in xs):
        if n >= 1:
            num = sum(math.comb(y - x + n - 1, n - 1) * f0[y] for y in range(max(x, 0), t + 1))
        else:
            num = sum((-1) ** j * math.comb(-n, j) * f0_at(x + j) for j in range(-n + 1))
        out[i] = num / scale  # int / int is correctly rounded
    return out


def f_n(n: int, x, params: ModelParams, tol: float = 1e-14, method: str = "auto"):
    """One-particle function ``F_n(x, t)``.

    ``F_n(x,t) = (1-p)^t (-1)^n/(2 pi i) \\oint dw/w (1 + p w/(1-p))^t
    (1-w)^(-n) / w^(x-n)``, with the circle enclosing 0 and 1 for ``n >= 1``
    and only 0 for ``n <= 0``.

    ``F_0(x,t)`` is the Binomial(t, p) probability of ``x``; ``F_{n+1}`` sums
    ``F_n`` over ``y >= x``; ``F_{n-1}(x) = F_n(x) - F_n(x+1)``.

    Parameters
    ----------
    n : int
    x : int or array_like of int
    params : ModelParams
    method : {"auto", "exact", "contour"}
        ``"exact"`` evaluates the equivalent finite sums in integer
        arithmetic (correctly rounded); ``"contour"`` uses the integral.
        ``"auto"`` picks ``"exact"`` for ``t <= EXACT_F_MAX_T``.

    Returns
    -------
    float or ndarray
    """
    p, t = float(params.p), params.t
    xs = np.atleast_1d(np.asarray(x, dtype=np.int64))
    if method == "auto":
        method = "exact" if t <= EXACT_F_MAX_T else "contour"
    if method == "exact":
        out = _f_n_exact(n, xs, p, t)
        return float(out[0]) if np.ndim(x) == 0 else out
    if method != "contour":
        raise ValueError(f"unknown method {method!r}")
    lq = math.log1p(-p)
    c = p / (1 - p)
    radii = np.array([_f_n_radius(n, int(v), p, t) for v in xs])
    out = np.empty(xs.shape)
    for r in np.unique(radii):
        sel = radii == r
        xr = xs[sel]

        def integrand(w, xr=xr):
            lw = np.log(w)
            base = t * np.log1p(c * w) - n * np.log1p(-w) + t * lq
            return np.exp(base[None, :] + (n - xr[:, None] - 1).astype(float) * lw[None, :])

        val, _ = contour_integral(integrand, ComplexContour(0, float(r), 64), tol)
        out[sel] = np.real(np.asarray(val) / TWO_PI_I)
    out *= (-1) ** (n % 2)
    return float(out[0]) if np.ndim(x) == 0 else out


def green_function(ys, xs, params: ModelParams) -> float:
    """Transition probability ``det[F_{i-j}(x_{N+1-i} - y_{N+1-j}, t)]``.

    Parameters
    ----------
    ys, xs : sequence of int
        Initial and final positions, strictly decreasing, equal length.
    """
    ys, xs = list(ys), list(xs)
    N = len(xs)
    if len(ys) != N or N == 0:
        raise ValueError("sequences must be nonempty and of equal length")
    M = np.empty((N, N))
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            M[i - 1, j - 1] = f_n(i - j, xs[N - i] - ys[N - j], params)
    return float(np.linalg.det(M))


_PSI_GRID = np.exp(np.linspace(np.log(0.02), np.log(50.0), 241))


def _psi_radius(z, k, d, t, p):
    """Radius minimising the Cauchy bound
    ``(1-p+pr)^t (1+r)^|k| r^((d-1)k-z)`` of the Psi integrand.

    For ``k >= 0`` the integrand is a Laurent polynomial and any radius is
    admissible; for ``k < 0`` the pole at ``w = 1`` must stay outside.
    """
    r = _PSI_GRID if k >= 0 else _PSI_GRID[_PSI_GRID < 0.95]
    logb = t * np.log1p(p * (r - 1)) + abs(k) * np.log1p(r) + ((d - 1) * k - z) * np.log(r)
    return float(r[np.argmin(logb)])


def psi_array(n: int, k: int, xs, params: ModelParams, tol: float = 1e-14) -> np.ndarray:
    """``Psi^n_k(x)`` for an array of ``x``.

    ``Psi^n_k(x) = (-1)^k/(2 pi i) \\oint dw / w^(z+1) (1 + p(w-1))^t
    ((w-1) w^(d-1))^k`` with ``z = x + d(n-1)`` and a circle of radius
    below 1 around the origin. For ``k >= 0`` the integrand is a polynomial
    times ``w^(-z-1)`` and the value vanishes for ``z < 0``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    p, d, t = float(params.p), params.d, params.t
    xs = np.atleast_1d(np.asarray(xs, dtype=np.int64))
    z = xs + d * (n - 1)
    out = np.zeros(xs.shape, dtype=float)
    active = np.ones(xs.shape, dtype=bool)
    if k >= 0:
        active = (z >= 0) & (z <= t + d * k)
    if not np.any(active):
        return out
    za = z[active]
    # group the z values by their Cauchy-bound radius
    radii = np.array([_psi_radius(int(v), k, d, t, p) for v in za])
    vals = np.empty(za.shape)
    for r in np.unique(radii):
        sel = radii == r
        zr = za[sel]

        def integrand(w, zr=zr):
            lw = np.log(w)
            base = t * np.log1p(p * (w - 1)) + k * (np.log(w - 1) + (d - 1) * lw)
            return np.exp(base[None, :] - (zr[:, None] + 1).astype(float) * lw[None, :])

        val, _ = contour_integral(integrand, ComplexContour(0, float(r), 64), tol)
        vals[sel] = np.real(np.asarray(val) / TWO_PI_I)
    out[active] = vals * (-1) ** (k % 2)
    return out


def psi(n: int, k: int, x: int, params: ModelParams, tol: float = 1e-14) -> float:
    """Scalar :func:`psi_array`."""
    return float(psi_array(n, k, [x], params, tol)[0])


def phi_array(n: int, k: int, xs, params: ModelParams, tol: float = 1e-14) -> np.ndarray:
    """``Phi^n_k(x)`` for an array of ``x``; a polynomial of degree ``k`` in ``x``.

    ``Phi^n_k(x) = (-1)^k/(2 pi i) \\oint dv/v (1+dv)/(1+pv)^t
    (1+v)^(z-1) / (v (1+v)^(d-1))^k`` around ``v = 0`` only.

    The only singularity inside the contour is the pole at ``v = 0``, so the
    integral is the ``v^k`` Taylor coefficient of
    ``(1+dv) (1+pv)^(-t) (1+v)^m`` with ``m = z - 1 - (d-1)k``.  It is
    evaluated as a finite convolution of the three binomial series, which
    avoids the cancellation a contour quadrature suffers when ``|m|`` is
    large.  ``tol`` is accepted for interface symmetry and unused.
    """
    if n < 1 or k < 0:
        raise ValueError("need n >= 1 and k >= 0")
    p, d, t = float(params.p), params.d, params.t
    xs = np.atleast_1d(np.asarray(xs, dtype=np.int64))
    if k == 0:
        return np.ones(xs.shape)
    m = (xs + d * (n - 1) - 1 - (d - 1) * k).astype(float)
    # generalised binomial coefficients C(m, j), j = 0..k, for every x
    bm = np.ones((k + 1,) + m.shape)
    for j in range(1, k + 1):
        bm[j] = bm[j - 1] * (m - (j - 1)) / j
    # coefficients of (1+dv)(1+pv)^(-t)
    c = np.empty(k + 1)
    c[0] = 1.0
    for j in range(1, k + 1):
        c[j] = c[j - 1] * (-p) * (t + j - 1) / j
    a = c.copy()
    a[1:] += d * c[:-1]
    val = np.tensordot(a[::-1], bm, axes=(0, 0))
    return val * (-1) ** (k % 2)


def phi(n: int, k: int, x: int, params: ModelParams, tol: float = 1e-14) -> float:
    """Scalar :func:`phi_array`."""
    return float(phi_array(n, k, [x], params, tol)[0])


def binomial_part(point: KernelPoint) -> float:
    """``C(x1 - x2 - 1, n2 - n1 - 1)``, zero when the lower index is negative
    or exceeds the upper one."""
    lb = log_binomial(point.x1 - point.x2 - 1, point.n2 - point.n1 - 1)
    return 0.0 if lb == -math.inf else float(round(math.exp(lb))) if lb < 36 else math.exp(lb)


# ---------------------------------------------------------------------------
# kernel blocks


def default_radius(d: int, method: str) -> float:
    """Contour radius: ``1/2`` for the ``d = 2`` formula, ``1/(2d)`` otherwise."""
    return 0.5 if method == "d2" else 1.0 / (2 * d)


def _resolve_method(method, d):
    if method == "auto":
        return "d2" if d == 2 else "roots"
    if method not in ("d2", "roots"):
        raise ValueError(f"unknown kernel method {method!r}")
    if method == "d2" and d != 2:
        raise ValueError("the single-contour formula requires d = 2")
    return method


def _node_terms(method, params, n1, n2, v, conj):
    """Per-node log factors ``(common, alpha, beta)`` so that the K0 integrand
    is ``exp(common - x1*alpha + x2*beta)`` and node weights multiply it.

    Returns arrays over the (possibly root-expanded) node axis plus the
    matching index into ``v``.
    """
    p, d, t = float(params.p), params.d, params.t
    cw = ConjugationWeights(d)
    if method == "d2":
        lv = np.log(-v)
        l1 = np.log1p(v)
        common = (
            (n1 + n2 - 2) * l1
            - (n1 + n2 - 1) * lv
            + t * (np.log(1 - p - p * v) - np.log1p(p * v))
            + 1j * np.pi
        )
        alpha, beta = lv, l1
        idx = np.arange(v.size)
    else:
        u = offspring_roots_batch(v, d)  # (m, d-1)
        idx = np.repeat(np.arange(v.size), d - 1)
        u = u.reshape(-1)
        vv = v[idx]
        l1u = np.log1p(u)
        l1v = np.log1p(vv)
        common = (
            np.log1p(d * vv)
            - np.log1p(d * u)
            + t * (np.log1p(p * u) - np.log1p(p * vv))
            + n1 * np.log(-u)
            - n2 * np.log(-vv)
            + (n2 - 2) * l1v
            - (n1 - 1) * l1u
        )
        alpha, beta = l1u, l1v
    if conj:
        alpha = alpha + cw.log_ratio
        beta = beta + cw.log_ratio
        common = common + (d * n2 - d * n1) * cw.log_ratio + (n1 - n2) * cw.log_level
    return common, alpha, beta, idx


def _block_sum(common, alpha, beta, weights, xs1, xs2, with_abs=False):
    a = -np.outer(xs1, alpha)  # (W1, M)
    b = np.outer(beta, xs2)  # (M, W2)
    ma = np.max(a.real, axis=0)
    mb = np.max(b.real, axis=1)
    R = np.exp(a - ma[None, :])
    S = np.exp(b - mb[:, None])
    c = weights * np.exp(common + ma + mb)
    val = R @ (c[:, None] * S) / TWO_PI_I
    if not with_abs:
        return val
    mag = np.abs(R) @ (np.abs(c)[:, None] * np.abs(S)) / (2 * np.pi)
    return val, mag


def _radius_limit(method, params):
    if method == "roots":
        return 1.0 / params.d
    return min(1.0, 1.0 / params.p)


def _auto_radius(method, params, n1, n2, xs1, xs2, conj):
    """Radius minimising the largest Cauchy bound ``r max|f|`` over the
    corner entries of the block (the integral itself does not depend on r)."""
    rmax = _radius_limit(method, params)
    corners1 = np.array([xs1.min(), xs1.max()], dtype=float)
    corners2 = np.array([xs2.min(), xs2.max()], dtype=float)
    best, best_r = np.inf, None
    j = np.arange(64)
    for frac in np.arange(0.1, 0.951, 0.05):
        r = frac * rmax
        v = r * np.exp(2j * np.pi * (j + 0.5) / 64)
        with np.errstate(divide="ignore"):
            common, alpha, beta, _ = _node_terms(method, params, n1, n2, v, conj)
        lf = (
            common.real[None, None, :]
            - corners1[:, None, None] * alpha.real[None, None, :]
            + corners2[None, :, None] * beta.real[None, None, :]
        )
        score = float(np.max(np.max(lf, axis=2))) + np.log(r)
        if score < best - 1e-9:
            best, best_r = score, r
    return best_r


def kernel_matrix(
    params: ModelParams,
    n1: int,
    xs1,
    n2: int,
    xs2,
    conjugate: bool = True,
    method: str = "auto",
    radius: float | str | None = "auto",
    tol: float = 1e-13,
    max_nodes: int = DEFAULT_MAX_NODES,
    include_binomial: bool = True,
):
    """Block ``K(n1, x; n2, y)`` for ``x`` in ``xs1`` and ``y`` in ``xs2``.

    Parameters
    ----------
    params : ModelParams
    n1, n2 : int
        Particle indices of the row and column block.
    xs1, xs2 : array_like of int
        Row and column positions.
    conjugate : bool
        Include the gauge factor of :class:`ConjugationWeights`.
    method : {"auto", "d2", "roots"}
        ``"d2"`` uses the single-contour ``d = 2`` formula, ``"roots"`` the
        general formula summed over the nontrivial roots. ``"auto"`` picks
        ``"d2"`` when ``d = 2``.
    radius : float, "auto" or None
        Contour radius. It must lie below ``1/d`` for ``"roots"`` (where the
        root ``u_1`` meets ``v``) and below ``min(1, 1/p)`` for ``"d2"``
        (below ``1/p`` when ``x2 + n1 + n2 - 2 >= 0`` for all columns).
        ``None`` gives :func:`default_radius`; ``"auto"`` minimises the
        Cauchy bound of the integrand over the block corners.
    tol : float
        Node doubling stops when every entry changes by less than
        ``tol * max(1, |entry|)``, or by less than the round-off level
        ``64 eps sum|w f|`` of the quadrature sum.

    Returns
    -------
    matrix : ndarray of float, shape (len(xs1), len(xs2))
    info : dict
        ``nodes`` used, ``radius``, the largest ``imag_residual`` relative to
        ``1 + |value|`` and the largest round-off estimate ``roundoff``.

    Raises
    ------
    NonConvergence, ResidualImaginary
    """
    if n1 < 1 or n2 < 1:
        raise ValueError("particle indices must be >= 1")
    d = params.d
    method = _resolve_method(method, d)
    xs1 = np.atleast_1d(np.asarray(xs1, dtype=np.int64))
    xs2 = np.atleast_1d(np.asarray(xs2, dtype=np.int64))
    x1f, x2f = xs1.astype(float), xs2.astype(float)
    if radius is None:
        radius = default_radius(d, method)
    elif isinstance(radius, str):
        if radius != "auto":
            raise ValueError(f"unknown radius option {radius!r}")
        radius = _auto_radius(method, params, n1, n2, x1f, x2f, conjugate)
    limit = _radius_limit(method, params)
    if method == "d2" and xs2.size and int(xs2.min()) + n1 + n2 - 2 >= 0:
        # (1+v)^(x2+n1+n2-2) is then a polynomial: only the pole -1/p remains
        limit = 1.0 / float(params.p)
    if not 0 < radius < limit:
        raise ValueError(f"radius {radius} outside (0, {limit}) for method {method!r}")

    def partial(m, offset, stride):
        j = np.arange(offset, m, stride)
        v = radius * np.exp(2j * np.pi * j / m)
        w = (TWO_PI_I / m) * v
        with np.errstate(divide="ignore"):
            common, alpha, beta, idx = _node_terms(method, params, n1, n2, v, conjugate)
        return _block_sum(common, alpha, beta, w[idx], x1f, x2f, with_abs=True)

    m = 64
    with np.errstate(over="ignore", invalid="ignore"):
        val, mag = partial(m, 0, 1)
    eps = np.finfo(float).eps
    while True:
        if not np.all(np.isfinite(val)):
            raise NonConvergence("kernel block overflowed; entries are not finite")
        if 2 * m > max_nodes:
            raise NonConvergence(f"kernel block not converged with {m} nodes")
        with np.errstate(over="ignore", invalid="ignore"):
            v2, mag2 = partial(2 * m, 1, 2)
        new = 0.5 * val + v2
        mag = 0.5 * mag + mag2
        floor = 64 * eps * mag
        done = np.all(np.abs(new - val) < np.maximum(tol * np.maximum(1.0, np.abs(new)), floor))
        val, m = new, 2 * m
        if done:
            break
    imag = np.abs(val.imag) / (1 + np.abs(val.real))
    imag = np.where(np.abs(val.imag) <= floor, 0.0, imag)
    imag_res = float(imag.max()) if imag.size else 0.0
    if imag_res > IMAG_TOL:
        raise ResidualImaginary(f"kernel imaginary residual {imag_res:.3g}")
    out = val.real
    if include_binomial and n2 > n1:
        lb = log_binomial_array(xs1[:, None] - xs2[None, :] - 1, n2 - n1 - 1)
        if conjugate:
            cw = ConjugationWeights(d)
            lb = lb + cw.log_factor(n1, xs1[:, None], n2, xs2[None, :])
        out = out - np.exp(lb)
    info = {
        "nodes": m,
        "radius": float(radius),
        "method": method,
        "imag_residual": imag_res,
        "roundoff": float(floor.max()) if floor.size else 0.0,
    }
    return out, info


def _scalar(point: KernelPoint, conjugate, method, **kw):
    val, info = kernel_matrix(
        point.params, point.n1, [point.x1], point.n2, [point.x2], conjugate, method, **kw
    )
    return float(val[0, 0])


def kernel_K(point: KernelPoint, method: str = "roots", **kw) -> float:
    """Kernel of the ``dZ`` system from the root formula (any ``d``)."""
    return _scalar(point, False, method, **kw)


def kernel_K_d2(point: KernelPoint, **kw) -> float:
    """Kernel of the ``2Z`` system from the single-contour formula."""
    if point.params.d != 2:
        raise ValueError("kernel_K_d2 requires d = 2")
    return _scalar(point, False, "d2", **kw)


def conjugate_kernel(point: KernelPoint, method: str = "auto", **kw) -> float:
    """Kernel times the gauge factor, with the factor folded into the integrand."""
    return _scalar(point, True, method, **kw)


# ---------------------------------------------------------------------------
# half-line system (particles 1..N only)


def kernel_finite_matrix(params: ModelParams, n1: int, xs1, n2: int, xs2, conjugate: bool = True):
    """Kernel of the system without particles to the right of particle 1.

    ``K = -C(x1-x2-1, n2-n1-1) + sum_{i=0}^{n2-1} Psi^{n1}_{n1-n2+i}(x1) Phi^{n2}_i(x2)``.
    """
    xs1 = np.atleast_1d(np.asarray(xs1, dtype=np.int64))
    xs2 = np.atleast_1d(np.asarray(xs2, dtype=np.int64))
    out = np.zeros((xs1.size, xs2.size))
    for i in range(n2):
        out += np.outer(psi_array(n1, n1 - n2 + i, xs1, params), phi_array(n2, i, xs2, params))
    if n2 > n1:
        out -= np.exp(log_binomial_array(xs1[:, None] - xs2[None, :] - 1, n2 - n1 - 1))
    if conjugate:
        cw = ConjugationWeights(params.d)
        out *= np.exp(cw.log_factor(n1, xs1[:, None], n2, xs2[None, :]))
    return out


def kernel_finite(point: KernelPoint, conjugate: bool = False) -> float:
    """Scalar :func:`kernel_finite_matrix`."""
    return float(
        kernel_finite_matrix(point.params, point.n1, [point.x1], point.n2, [point.x2], conjugate)[0, 0]
    )
