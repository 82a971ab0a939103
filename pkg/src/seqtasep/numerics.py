"""Shared numerical building blocks.

This module provides trapezoid quadrature on circles in the complex plane,
log-domain binomial coefficients, and a counter-based random number
generator whose draws depend only on ``(seed, stream_id, draw index)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .errors import NonConvergence

__all__ = [
    "ComplexContour",
    "contour_nodes",
    "contour_integral",
    "log_binomial",
    "log_binomial_array",
    "SeededRng",
    "rng_uniform",
    "splitmix_key",
    "DEFAULT_MAX_NODES",
]

DEFAULT_MAX_NODES = 2**16


@dataclass(frozen=True)
class ComplexContour:
    """Circle ``|v - center| = radius`` traversed anticlockwise.

    Parameters
    ----------
    center : complex
        Centre of the circle.
    radius : float
        Radius, strictly positive.
    node_count : int
        Number of trapezoid nodes; a power of two, at least 8.
    """

    center: complex = 0.0
    radius: float = 1.0
    node_count: int = 64

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"contour radius must be positive, got {self.radius}")
        m = int(self.node_count)
        if m < 8 or m & (m - 1):
            raise ValueError(f"node_count must be a power of two >= 8, got {self.node_count}")

    def with_nodes(self, m: int) -> "ComplexContour":
        return ComplexContour(self.center, self.radius, m)


def _circle(center, radius, m, offset=0, stride=1):
    j = np.arange(offset, m, stride)
    nodes = center + radius * np.exp(2j * np.pi * j / m)
    weights = (2j * np.pi / m) * (nodes - center)
    return nodes, weights


def contour_nodes(contour: ComplexContour):
    """Trapezoid nodes and weights on a circle.

    Parameters
    ----------
    contour : ComplexContour

    Returns
    -------
    nodes, weights : ndarray of complex
        ``sum(weights * f(nodes))`` approximates the contour integral of
        ``f``. The weights are ``(2*pi*i/m) * (node - center)``.
    """
    return _circle(complex(contour.center), contour.radius, contour.node_count)


def contour_integral(
    f: Callable[[np.ndarray], np.ndarray],
    contour: ComplexContour,
    tol: float = 1e-12,
    max_nodes: int = DEFAULT_MAX_NODES,
):
    """Integrate ``f`` around a circle, doubling the nodes until converged.

    The integrand is evaluated on arrays: ``f(nodes)`` must return an array
    whose last axis runs over the nodes, so that many integrals sharing the
    same contour are computed at once. Previously evaluated nodes are reused
    when the node count doubles.

    Parameters
    ----------
    f : callable
        Vectorised integrand, ``f(v) -> ndarray (..., len(v))``.
    contour : ComplexContour
        Circle and starting node count.
    tol : float
        Stop when every component satisfies
        ``|I(2m) - I(m)| < tol * max(1, |I(2m)|)``.
    max_nodes : int
        Cap on the node count.

    Returns
    -------
    value : complex or ndarray of complex
        Approximation of the contour integral.
    nodes_used : int
        Number of nodes at the accepted approximation.

    Raises
    ------
    NonConvergence
        If the tolerance is not met before ``max_nodes`` is exceeded.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    c = complex(contour.center)
    m = contour.node_count
    nodes, weights = _circle(c, contour.radius, m)
    value = np.sum(np.asarray(f(nodes)) * weights, axis=-1)
    while True:
        m2 = 2 * m
        if m2 > max_nodes:
            raise NonConvergence(
                f"contour integral not converged with {m} nodes (cap {max_nodes})"
            )
        # odd nodes of the refined rule; the even ones are the previous nodes
        nodes, weights = _circle(c, contour.radius, m2, offset=1, stride=2)
        new = 0.5 * value + np.sum(np.asarray(f(nodes)) * weights, axis=-1)
        err = np.abs(new - value)
        scale = np.maximum(1.0, np.abs(new))
        value, m = new, m2
        if np.all(err < tol * scale):
            break
    if np.ndim(value) == 0:
        value = complex(value)
    return value, m


def log_binomial(a: int, b: int) -> float:
    """Natural logarithm of the binomial coefficient ``C(a, b)``.

    Uses the combinatorial convention: the coefficient is zero (and
    ``-inf`` is returned) when ``b < 0`` or ``a < b``.

    Examples
    --------
    >>> round(math.exp(log_binomial(5, 2)))
    10
    >>> log_binomial(3, 5)
    -inf
    """
    a, b = int(a), int(b)
    if b < 0 or a < b:
        return -math.inf
    if b == 0 or b == a:
        return 0.0
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def log_binomial_array(a, b):
    """Vectorised :func:`log_binomial` on integer arrays."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    a, b = np.broadcast_arrays(a, b)
    out = np.full(a.shape, -np.inf)
    ok = (b >= 0) & (a >= b)
    af, bf = a[ok].astype(float), b[ok].astype(float)
    out[ok] = gammaln(af + 1) - gammaln(bf + 1) - gammaln(af - bf + 1)
    return out


# ---------------------------------------------------------------------------
# Counter-based randomness (SplitMix64 finaliser applied to a counter).

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_STREAM_SALT = 0xD1B54A32D192ED03


def _mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def splitmix_key(seed: int, stream_id: int) -> int:
    """Mix ``(seed, stream_id)`` into the 64-bit key of a stream."""
    return _mix64((seed & _MASK) ^ _mix64((stream_id ^ _STREAM_SALT) & _MASK))


class SeededRng:
    """Deterministic uniform generator addressed by ``(seed, stream_id)``.

    Draw ``i`` of a stream is a pure function of the key and ``i``, so
    streams can be split across workers without changing any value.

    Parameters
    ----------
    seed : int
        64-bit seed.
    stream_id : int
        64-bit stream identifier.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed) & _MASK
        self.stream_id = int(stream_id) & _MASK
        self.key = splitmix_key(self.seed, self.stream_id)
        self.counter = 0

    def uniform(self) -> float:
        self.counter += 1
        z = _mix64(self.key + self.counter * _GOLDEN)
        return (z >> 11) * 2.0**-53

    def uniforms(self, n: int) -> np.ndarray:
        """Next ``n`` draws as an array (identical to ``n`` scalar draws)."""
        i = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        with np.errstate(over="ignore"):
            z = np.uint64(self.key) + i * np.uint64(_GOLDEN)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            z = z ^ (z >> np.uint64(31))
        return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53


def rng_uniform(rng: SeededRng) -> float:
    """Next uniform draw in ``[0, 1)`` from ``rng``."""
    return rng.uniform()
