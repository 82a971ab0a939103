"""Nontrivial roots of ``u (1+u)^(d-1) = v (1+v)^(d-1)``.

For fixed ``v`` the equation is a degree-``d`` polynomial in ``u`` with the
trivial root ``u = v``. That factor is removed exactly by synthetic division
and the remaining ``d - 1`` roots are computed from the companion matrix,
then polished by Newton steps on the deflated polynomial.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Callable

import numpy as np

from .errors import Degenerate

__all__ = [
    "RootSet",
    "offspring_roots",
    "offspring_roots_batch",
    "symmetric_sum",
    "residual",
]

COLLISION_TOL = 1e-12


@dataclass(frozen=True)
class RootSet:
    """Roots of ``R(u, v) = u(1+u)^(d-1) - v(1+v)^(d-1)`` at fixed ``v``.

    Attributes
    ----------
    v : complex
    d : int
    trivial_root : complex
        Equal to ``v``.
    nontrivial_roots : ndarray of complex, shape (d-1,)
    """

    v: complex
    d: int
    trivial_root: complex
    nontrivial_roots: np.ndarray


def residual(u, v, d):
    """``u (1+u)^(d-1) - v (1+v)^(d-1)``."""
    return u * (1 + u) ** (d - 1) - v * (1 + v) ** (d - 1)


def _deflated_coefficients(v, d):
    # u(1+u)^{d-1} = sum_k a_k u^k with a_k = C(d-1, k-1), k = 1..d.
    # Dividing by (u - v) gives q_j = sum_{k=j+1}^{d} a_k v^{k-1-j}, j = 0..d-1.
    v = np.asarray(v, dtype=complex)
    a = [0] + [comb(d - 1, k - 1) for k in range(1, d + 1)]
    q = np.zeros(v.shape + (d,), dtype=complex)
    acc = np.zeros(v.shape, dtype=complex)
    for j in range(d - 1, -1, -1):  # Horner-style recurrence q_j = a_{j+1} + v q_{j+1}
        acc = a[j + 1] + v * acc
        q[..., j] = acc
    return q  # q[..., j] is the coefficient of u^j; leading q_{d-1} = 1


def _check_degenerate(v, d):
    v = np.asarray(v, dtype=complex)
    bad = np.abs(v + 1.0 / d) < COLLISION_TOL
    if d >= 3:
        bad |= np.abs(v + 1.0) < COLLISION_TOL
    if np.any(bad):
        vb = v[bad].ravel()[0] if v.ndim else complex(v)
        raise Degenerate(f"nontrivial root collides with v = {vb} (d = {d})")


def offspring_roots_batch(v, d: int, polish: int = 3) -> np.ndarray:
    """Nontrivial roots for an array of ``v`` values.

    Parameters
    ----------
    v : array_like of complex
    d : int
        Period, ``d >= 2``.
    polish : int
        Number of Newton steps on the deflated polynomial.

    Returns
    -------
    ndarray of complex, shape ``v.shape + (d-1,)``

    Raises
    ------
    Degenerate
        If some ``v`` lies within 1e-12 of a point where a nontrivial root
        coincides with ``v``.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    v = np.asarray(v, dtype=complex)
    _check_degenerate(v, d)
    if d == 2:
        return (-1.0 - v)[..., None]
    q = _deflated_coefficients(v, d)  # monic of degree d-1
    n = d - 1
    flat = q.reshape(-1, d)
    comp = np.zeros((flat.shape[0], n, n), dtype=complex)
    comp[:, 0, :] = -flat[:, n - 1 :: -1][:, :n]  # -q_{n-1}, ..., -q_0
    if n > 1:
        comp[:, np.arange(1, n), np.arange(0, n - 1)] = 1.0
    roots = np.linalg.eigvals(comp)
    for _ in range(polish):
        val = np.zeros_like(roots)
        der = np.zeros_like(roots)
        for j in range(n, -1, -1):
            der = der * roots + val
            val = val * roots + flat[:, j][:, None]
        step = np.where(der != 0, val / np.where(der != 0, der, 1), 0)
        roots = roots - step
    return roots.reshape(v.shape + (n,))


def offspring_roots(v: complex, d: int) -> RootSet:
    """Roots of ``u(1+u)^(d-1) = v(1+v)^(d-1)`` with ``u = v`` split off.

    Examples
    --------
    >>> offspring_roots(0.3, 2).nontrivial_roots
    array([-1.3+0.j])
    """
    v = complex(v)
    roots = offspring_roots_batch(np.array(v), d)
    return RootSet(v=v, d=d, trivial_root=v, nontrivial_roots=np.asarray(roots))


def symmetric_sum(v: complex, d: int, g: Callable[[complex], complex]) -> complex:
    """``sum_i g(u_i(v))`` over the nontrivial roots.

    The result does not depend on how the roots are ordered, so it is a
    single-valued function of ``v``.
    """
    roots = offspring_roots(v, d).nontrivial_roots
    return complex(sum(g(u) for u in roots))
