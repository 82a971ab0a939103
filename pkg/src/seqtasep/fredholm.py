"""Joint distributions of particle positions as Fredholm determinants on Z.

For indices ``sigma(1) < ... < sigma(m)`` and thresholds ``a_k``,

    P(x_{sigma(k)}(t) >= a_k, k = 1..m) = det(1 - chi K chi),

with ``chi`` the projector onto ``{(sigma(k), x): x < a_k}``. The operator is
truncated to the ``W`` sites of each block nearest to ``a_k`` and ``W`` is
doubled until the determinant settles. Entries use the conjugated kernel,
which decays away from the bulk and keeps the truncation effective.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonConvergence
from .kernel import kernel_finite_matrix, kernel_matrix
from .model import Convention, JointQuery, ModelParams

__all__ = [
    "JointQuery",
    "Convention",
    "BlockKernelMatrix",
    "KernelCache",
    "CdfReport",
    "block_window",
    "assemble",
    "det_one_minus",
    "joint_cdf",
    "SYSTEMS",
]

SYSTEMS = ("full", "half")
DEFAULT_CONVENTION = Convention.GEQ


@dataclass
class BlockKernelMatrix:
    """Truncated block kernel.

    Attributes
    ----------
    labels : list of (int, int)
        ``(block k, site x)`` for each row/column.
    entries : ndarray, shape (n, n)
    W : int
        Window size requested per block.
    """

    labels: list
    entries: np.ndarray
    W: int
    info: dict = field(default_factory=dict)


class KernelCache:
    """Memoises kernel blocks over contiguous site ranges.

    Assembling many windows for the same particle indices (window doubling,
    threshold sweeps) only evaluates each kernel entry once.
    """

    def __init__(self, params: ModelParams, system: str = "full", method: str = "auto", tol: float = 1e-13):
        if system not in SYSTEMS:
            raise ValueError(f"system must be one of {SYSTEMS}")
        self.params, self.system, self.method, self.tol = params, system, method, tol
        self._blocks = {}
        self.max_nodes = 0
        self.max_imag = 0.0

    def _compute(self, n1, lo1, hi1, n2, lo2, hi2):
        xs1 = np.arange(lo1, hi1 + 1)
        xs2 = np.arange(lo2, hi2 + 1)
        if self.system == "half":
            return kernel_finite_matrix(self.params, n1, xs1, n2, xs2, conjugate=True)
        mat, info = kernel_matrix(self.params, n1, xs1, n2, xs2, conjugate=True, method=self.method, tol=self.tol)
        self.max_nodes = max(self.max_nodes, info["nodes"])
        self.max_imag = max(self.max_imag, info["imag_residual"])
        return mat

    def block(self, n1: int, xs1: np.ndarray, n2: int, xs2: np.ndarray) -> np.ndarray:
        if xs1.size == 0 or xs2.size == 0:
            return np.zeros((xs1.size, xs2.size))
        lo1, hi1, lo2, hi2 = int(xs1[0]), int(xs1[-1]), int(xs2[0]), int(xs2[-1])
        key = (n1, n2)
        hit = self._blocks.get(key)
        if hit is None or not (hit[0] <= lo1 and hi1 <= hit[1] and hit[2] <= lo2 and hi2 <= hit[3]):
            if hit is not None:
                lo1, hi1 = min(lo1, hit[0]), max(hi1, hit[1])
                lo2, hi2 = min(lo2, hit[2]), max(hi2, hit[3])
            hit = (lo1, hi1, lo2, hi2, self._compute(n1, lo1, hi1, n2, lo2, hi2))
            self._blocks[key] = hit
        c1, _, c2, _, mat = hit
        return mat[xs1[0] - c1 : xs1[-1] - c1 + 1, xs2[0] - c2 : xs2[-1] - c2 + 1]


def block_window(n: int, a: int, W: int, convention: Convention, params: ModelParams, system: str) -> np.ndarray:
    """Sites of one block kept by the projector, the ``W`` nearest to ``a``.

    For the half-line system no point of level ``n`` lies below the initial
    position ``-d(n-1)`` of particle ``n``, so the window is clipped there.
    """
    if Convention(convention) is Convention.GEQ:
        lo, hi = a - W, a - 1
        if system == "half":
            lo = max(lo, -params.d * (n - 1))
    else:
        lo, hi = a + 1, a + W
        if system == "half":
            hi = min(hi, params.t)
    return np.arange(lo, hi + 1) if hi >= lo else np.arange(0)


def assemble(
    query: JointQuery,
    params: ModelParams,
    W: int,
    system: str = "full",
    cache: KernelCache | None = None,
) -> BlockKernelMatrix:
    """Block matrix of the conjugated kernel on the projected windows.

    Parameters
    ----------
    query : JointQuery
    params : ModelParams
    W : int
        Sites per block.
    system : {"full", "half"}
        ``"full"``: particles on all of ``dZ``. ``"half"``: particles
        ``1, 2, ...`` only (free leader).
    cache : KernelCache, optional
    """
    if W < 1:
        raise ValueError("W must be >= 1")
    if cache is None:
        cache = KernelCache(params, system)
    wins = [
        block_window(n, a, W, query.convention, params, system)
        for n, a in zip(query.indices, query.thresholds)
    ]
    sizes = [w.size for w in wins]
    offs = np.concatenate([[0], np.cumsum(sizes)])
    M = np.zeros((offs[-1], offs[-1]))
    for k, (nk, wk) in enumerate(zip(query.indices, wins)):
        for l, (nl, wl) in enumerate(zip(query.indices, wins)):
            M[offs[k] : offs[k + 1], offs[l] : offs[l + 1]] = cache.block(nk, wk, nl, wl)
    labels = [(k, int(x)) for k, w in enumerate(wins) for x in w]
    return BlockKernelMatrix(labels, M, W, {"sizes": sizes})


def det_one_minus(matrix) -> float:
    """``det(I - M)`` by LU factorisation with partial pivoting.

    Accepts a :class:`BlockKernelMatrix` or a square array. The determinant
    is accumulated as sign and log-modulus, so it cannot overflow; a
    singular ``I - M`` gives 0.
    """
    M = matrix.entries if isinstance(matrix, BlockKernelMatrix) else np.asarray(matrix, dtype=float)
    if M.size == 0:
        return 1.0
    sign, logdet = np.linalg.slogdet(np.eye(M.shape[0]) - M)
    if sign == 0:
        return 0.0
    return float(sign * np.exp(logdet))


@dataclass
class CdfReport:
    """Diagnostics of :func:`joint_cdf`."""

    W: int
    deltas: list
    nodes: int
    imag_residual: float
    convention: str
    system: str
    raw: float


def joint_cdf(
    query: JointQuery,
    params: ModelParams,
    tol: float = 1e-10,
    system: str = "full",
    W0: int = 16,
    max_W: int = 4096,
    cache: KernelCache | None = None,
):
    """Joint distribution of selected particle positions at time ``t``.

    With the default ``GEQ`` convention this returns
    ``P(x_{sigma(k)}(t) >= a_k for all k)``.

    Parameters
    ----------
    query : JointQuery
    params : ModelParams
    tol : float
        Window doubling stops once successive determinants differ by less
        than ``tol``.
    system : {"full", "half"}
        See :func:`assemble`.
    W0, max_W : int
        Starting window and cap.
    cache : KernelCache, optional
        Reuse kernel evaluations across calls with the same parameters.

    Returns
    -------
    probability : float
        Clipped to ``[0, 1]`` when within ``tol`` of the boundary.
    report : CdfReport

    Raises
    ------
    NonConvergence
        If ``W`` would exceed ``max_W``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if cache is None:
        cache = KernelCache(params, system)
    elif cache.params != params or cache.system != system:
        raise ValueError("cache belongs to different parameters")
    W = W0
    first = assemble(query, params, W, system, cache)
    prev, prev_sizes = det_one_minus(first), first.info["sizes"]
    deltas = []
    while True:
        if 2 * W > max_W:
            raise NonConvergence(f"window not converged at W = {W} (cap {max_W})")
        mat = assemble(query, params, 2 * W, system, cache)
        cur = det_one_minus(mat)
        deltas.append(abs(cur - prev))
        W *= 2
        sizes = mat.info["sizes"]
        if abs(cur - prev) < tol or sizes == prev_sizes:
            break
        prev, prev_sizes = cur, sizes
    raw = cur
    if -tol <= cur < 0:
        cur = 0.0
    elif 1 < cur <= 1 + tol:
        cur = 1.0
    report = CdfReport(W, deltas, cache.max_nodes, cache.max_imag, query.convention.value, system, raw)
    return float(cur), report
