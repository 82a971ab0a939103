"""Large-time scaling frame and finite-time versus Airy_1 comparisons.

Constants, with speed ``v = p(d-1)/(d-p)``:

    kappa = (2(1-p)p)^(1/3) (d(d-1))^(2/3) / (d-p),   mu = -2 kappa^2/(d-1).

Particle ``n(u,t) = floor(v t/d - (mu/d) u t^(2/3))`` is followed and

    X_t(u) = (x_{n(u,t)}(t) - mu u t^(2/3)) / (-kappa t^(1/3))

converges to the Airy_1 process. For the kernel, the points

    x = floor(-2 kappa^2 r t^(2/3)/(d-1) - kappa s t^(1/3)),
    n = floor(v t/d + 2 kappa^2 r t^(2/3)/(d(d-1)))

satisfy ``kappa t^(1/3) K_conj(n1,x1; n2,x2) -> K_F1(r1,s1; r2,s2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .airy1 import kernel_KF1
from .errors import IndexOutOfRange
from .fredholm import KernelCache, joint_cdf
from .kernel import kernel_matrix
from .model import JointQuery, ModelParams

__all__ = [
    "ScalingFrame",
    "constants",
    "index_of",
    "scaling_points",
    "lattice_offset",
    "rescaled_thresholds",
    "rescaled_cdf",
    "kernel_limit_error",
]

_FLOOR_EPS = 1e-9  # guards floor/ceil against round-off in exact cases


def _floor(a: float) -> int:
    return math.floor(a + _FLOOR_EPS)


def _ceil(a: float) -> int:
    return math.ceil(a - _FLOOR_EPS)


@dataclass(frozen=True)
class ScalingFrame:
    """Scaling constants for given ``p`` and ``d``."""

    p: float
    d: int
    kappa: float
    mu: float
    speed: float
    density: float


def constants(p: float, d: int) -> ScalingFrame:
    """Scaling constants.

    Examples
    --------
    >>> f = constants(0.5, 2)
    >>> round(f.kappa, 4), round(f.mu, 4)
    (0.8399, -1.411)
    """
    ModelParams(p, d, 0)  # validation
    kappa = (2 * (1 - p) * p) ** (1 / 3) * (d * (d - 1)) ** (2 / 3) / (d - p)
    mu = -2 * kappa**2 / (d - 1)
    return ScalingFrame(p, d, kappa, mu, p * (d - 1) / (d - p), 1.0 / d)


def index_of(u: float, t: int, frame: ScalingFrame) -> int:
    """Label ``n(u, t)`` of the particle followed at rescaled time ``u``.

    Raises
    ------
    IndexOutOfRange
        If the label is below 1.
    """
    n = _floor(frame.speed * t / frame.d - frame.mu / frame.d * u * t ** (2 / 3))
    if n < 1:
        raise IndexOutOfRange(f"n(u={u}, t={t}) = {n} < 1")
    return n


def scaling_points(r: float, s: float, t: int, frame: ScalingFrame):
    """Lattice point ``(n, x)`` corresponding to ``(r, s)`` at time ``t``.

    Both coordinates are rounded down.
    """
    k, d = frame.kappa, frame.d
    t13, t23 = t ** (1 / 3), t ** (2 / 3)
    x = _floor(-2 * k * k * r * t23 / (d - 1) - k * s * t13)
    n = _floor(frame.speed * t / d + 2 * k * k * r * t23 / (d * (d - 1)))
    if n < 1:
        raise IndexOutOfRange(f"scaling point has n = {n} < 1")
    return n, x


def lattice_offset(u: float, t: int, frame: ScalingFrame) -> float:
    """Deterministic position of particle ``n(u,t)`` minus ``mu u t^(2/3)``.

    The particle starts at ``-d(n-1)`` and moves at speed ``v``, so its
    law-of-large-numbers position is ``-d(n-1) + v t``. Because of the label
    shift and the rounding of ``n`` this differs from the centring
    ``mu u t^(2/3)`` by an amount in ``[d, 2d)``, which is O(t^(-1/3)) after rescaling but
    not small at moderate ``t``.
    """
    n = index_of(u, t, frame)
    return -frame.d * (n - 1) + frame.speed * t - frame.mu * u * t ** (2 / 3)


def rescaled_thresholds(t: int, us, ss, frame: ScalingFrame, centered: bool = False):
    """Labels and thresholds so that ``{X_t(u_k) <= s_k} = {x_{n_k}(t) >= a_k}``.

    With ``centered=True`` the thresholds are moved by :func:`lattice_offset`;
    the default follows the rescaling exactly.
    """
    ns = [index_of(u, t, frame) for u in us]
    a = []
    for u, s in zip(us, ss):
        shift = lattice_offset(u, t, frame) if centered else 0.0
        a.append(_ceil(frame.mu * u * t ** (2 / 3) - frame.kappa * s * t ** (1 / 3) + shift))
    return ns, a


def rescaled_cdf(
    t: int,
    us,
    ss,
    frame: ScalingFrame,
    tol: float = 1e-9,
    cache: KernelCache | None = None,
    full_output: bool = False,
    centered: bool = False,
):
    """``P(X_t(u_k) <= s_k, k = 1..m)`` at finite time from the Fredholm determinant.

    Parameters
    ----------
    t : int
        Time, at least 10.
    us, ss : sequence of float
        Increasing rescaled times and levels.
    frame : ScalingFrame
    tol : float
        Window tolerance passed to :func:`joint_cdf`.
    cache : KernelCache, optional
        Reused across calls with the same ``t``.
    centered : bool
        Remove the deterministic lattice offset (diagnostic; off by default).
    """
    if t < 10:
        raise ValueError("t must be >= 10")
    ns, a = rescaled_thresholds(t, us, ss, frame, centered)
    params = ModelParams(frame.p, frame.d, t)
    val, rep = joint_cdf(JointQuery(tuple(ns), tuple(a)), params, tol=tol, cache=cache)
    return (val, rep) if full_output else val


def kernel_limit_error(t: int, r1: float, s1: float, r2: float, s2: float, frame: ScalingFrame, full_output: bool = False):
    """``|kappa t^(1/3) K_conj(n1,x1; n2,x2) - K_F1(r1,s1; r2,s2)|`` at the scaling points."""
    n1, x1 = scaling_points(r1, s1, t, frame)
    n2, x2 = scaling_points(r2, s2, t, frame)
    params = ModelParams(frame.p, frame.d, t)
    val, info = kernel_matrix(params, n1, [x1], n2, [x2], conjugate=True)
    scaled = frame.kappa * t ** (1 / 3) * float(val[0, 0])
    limit = kernel_KF1(r1, s1, r2, s2)
    err = abs(scaled - limit)
    if full_output:
        return err, {"scaled": scaled, "limit": limit, "points": ((n1, x1), (n2, x2)), **info}
    return err
