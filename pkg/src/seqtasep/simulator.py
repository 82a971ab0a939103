"""Monte Carlo simulation and exact enumeration of sequential-update TASEP.

Particles are labelled from right to left; label 1 starts at the origin and
label ``k`` at ``-d(k-1)``. In one time step the particles are processed from
right to left and each one jumps one site to the right with probability
``p`` if its right neighbour site is empty *after* the particles to its right
have already been updated, so blocks of adjacent particles can move together.

Two systems are supported through the ``ghosts`` argument:

* ``ghosts=0`` -- only particles ``1..N`` exist; particle 1 is never blocked.
* ``ghosts=None`` (default) -- the whole sublattice ``dZ`` is occupied. Only
  the finitely many particles to the right of particle 1 that can influence
  it before time ``t`` are kept (see :func:`light_cone_ghosts`), which makes
  the truncation exact.

Particles with a larger label never affect particles with a smaller one, so
in both cases ``N = max(observed label)`` is sufficient on the left.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numba
import numpy as np

from .errors import InsufficientParticles, TooLarge, WindowUncovered
from .model import Convention, JointQuery, ModelParams, light_cone_ghosts
from .numerics import SeededRng, splitmix_key

__all__ = [
    "ParticleSystem",
    "HeightProfile",
    "SpeedEstimate",
    "init_periodic",
    "step",
    "simulate",
    "simulate_batch",
    "enumerate_exact",
    "exact_distribution",
    "empirical_joint_cdf",
    "height_function",
    "average_speed_estimate",
    "bulk_index",
    "dump_samples_csv",
    "dump_height_csv",
]

CHUNK = 256  # samples per work unit; stream id of a sample is its global index


@dataclass(frozen=True)
class ParticleSystem:
    """Particle configuration at a given time.

    Attributes
    ----------
    positions : tuple of int
        Strictly decreasing positions; ``positions[i]`` belongs to label
        ``first_label + i``.
    time : int
    first_label : int
        Label of the rightmost particle (``<= 0`` when extra particles to
        the right of particle 1 are carried along).
    crossings : int
        Number of jumps across the bond ``(-1, 0)`` so far.
    """

    positions: tuple
    time: int = 0
    first_label: int = 1
    crossings: int = 0

    def __post_init__(self):
        pos = tuple(int(x) for x in self.positions)
        object.__setattr__(self, "positions", pos)
        if any(b >= a for a, b in zip(pos, pos[1:])):
            raise ValueError("positions must be strictly decreasing")

    def position(self, label: int) -> int:
        return self.positions[label - self.first_label]


@dataclass(frozen=True)
class HeightProfile:
    """Height function ``h(x)`` on the integer window ``[lo, lo + len(heights) - 1]``."""

    anchor: int
    lo: int
    heights: tuple

    @property
    def xs(self):
        return tuple(range(self.lo, self.lo + len(self.heights)))


def init_periodic(d: int, N: int, ghosts: int = 0) -> ParticleSystem:
    """Periodic initial condition ``x_k(0) = -d(k-1)``.

    Parameters
    ----------
    d : int
        Period.
    N : int
        Number of labelled particles ``1..N``.
    ghosts : int
        Extra particles at ``d, 2d, ..., ghosts*d`` (labels ``0, -1, ...``).

    Examples
    --------
    >>> init_periodic(2, 3).positions
    (0, -2, -4)
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    labels = range(1 - ghosts, N + 1)
    return ParticleSystem(tuple(-d * (k - 1) for k in labels), 0, 1 - ghosts, 0)


def step(state: ParticleSystem, p: float, rng: SeededRng) -> ParticleSystem:
    """One sequential-update time step.

    One uniform draw is consumed per particle, rightmost first, whether or
    not the particle is blocked; this matches the compiled batch simulator
    draw for draw.
    """
    x = list(state.positions)
    crossings = state.crossings
    for k in range(len(x)):
        u = rng.uniform()
        if u < p and (k == 0 or x[k - 1] != x[k] + 1):
            if x[k] == -1:
                crossings += 1
            x[k] += 1
    return ParticleSystem(tuple(x), state.time + 1, state.first_label, crossings)


# ---------------------------------------------------------------------------
# compiled batch simulation

_U64 = np.uint64


@numba.njit(inline="always")
def _mix64(z):
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
    return z ^ (z >> _U64(31))


@numba.njit(cache=True, nogil=True)
def _run_chunk(keys, x0, p, t, obs, rec_times, out, cross):
    n = keys.shape[0]
    P = x0.shape[0]
    R = rec_times.shape[0]
    x = np.empty(P, np.int64)
    golden = _U64(0x9E3779B97F4A7C15)
    scale = 2.0**-53
    for s in range(n):
        key = keys[s]
        ctr = _U64(0)
        for k in range(P):
            x[k] = x0[k]
        c = 0
        r = 0
        while r < R and rec_times[r] == 0:
            for j in range(obs.shape[0]):
                out[s, r, j] = x[obs[j]]
            r += 1
        for tau in range(1, t + 1):
            for k in range(P):
                ctr += _U64(1)
                u = (_mix64(key + ctr * golden) >> _U64(11)) * scale
                if u < p and (k == 0 or x[k - 1] != x[k] + 1):
                    if x[k] == -1:
                        c += 1
                    x[k] += 1
            while r < R and rec_times[r] == tau:
                for j in range(obs.shape[0]):
                    out[s, r, j] = x[obs[j]]
                r += 1
        cross[s] = c


def _resolve_ghosts(ghosts, t, d):
    if ghosts is None:
        return light_cone_ghosts(t, d)
    if ghosts < 0:
        raise ValueError("ghosts must be >= 0")
    return int(ghosts)


def simulate_batch(
    params: ModelParams,
    N: int,
    n_samples: int,
    seed: int,
    observe: Sequence[int],
    ghosts: int | None = None,
    record_times: Sequence[int] | None = None,
    threads: int = 1,
    first_sample: int = 0,
):
    """Simulate independent trajectories and record selected particles.

    Sample ``i`` uses the random stream ``(seed, first_sample + i)``, so the
    output does not depend on ``threads`` or on how samples are batched.

    Parameters
    ----------
    params : ModelParams
    N : int
        Number of labelled particles; must be at least ``max(observe)``.
    n_samples : int
    seed : int
    observe : sequence of int
        Labels to record.
    ghosts : int or None
        Extra particles to the right of particle 1; ``None`` selects the
        exact truncation of the system on all of ``dZ``.
    record_times : sequence of int, optional
        Increasing times at which to record; defaults to ``[t]``.
    threads : int
        Worker threads (the compiled kernel releases the GIL).

    Returns
    -------
    positions : ndarray of int64, shape (n_samples, len(record_times), len(observe))
    crossings : ndarray of int64, shape (n_samples,)
        Jumps across the bond ``(-1, 0)`` up to time ``t``.
    """
    observe = [int(k) for k in observe]
    if observe and max(observe) > N:
        raise InsufficientParticles(f"N = {N} < largest observed label {max(observe)}")
    if observe and min(observe) < 1:
        raise ValueError("observed labels must be >= 1")
    t, d, p = params.t, params.d, float(params.p)
    g = _resolve_ghosts(ghosts, t, d)
    x0 = np.array(init_periodic(d, N, g).positions, dtype=np.int64)
    obs = np.array([k - 1 + g for k in observe], dtype=np.int64)
    rec = np.array([t] if record_times is None else list(record_times), dtype=np.int64)
    if np.any(np.diff(rec) < 0) or (rec.size and (rec[0] < 0 or rec[-1] > t)):
        raise ValueError("record_times must be increasing within [0, t]")
    out = np.zeros((n_samples, rec.size, obs.size), dtype=np.int64)
    cross = np.zeros(n_samples, dtype=np.int64)
    keys = np.array(
        [splitmix_key(seed, first_sample + i) for i in range(n_samples)], dtype=np.uint64
    )

    def work(lo):
        hi = min(lo + CHUNK, n_samples)
        _run_chunk(keys[lo:hi], x0, p, t, obs, rec, out[lo:hi], cross[lo:hi])

    starts = range(0, n_samples, CHUNK)
    if threads <= 1:
        for lo in starts:
            work(lo)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, starts))
    return out, cross


def simulate(
    params: ModelParams,
    N: int,
    seed: int,
    observe: Sequence[int],
    ghosts: int | None = None,
    stream: int = 0,
) -> dict:
    """Positions of the observed particles at time ``t`` for one trajectory.

    Examples
    --------
    >>> simulate(ModelParams(0.5, 2, 0), 3, seed=1, observe=[1, 3])
    {1: 0, 3: -4}
    """
    out, _ = simulate_batch(params, N, 1, seed, observe, ghosts, first_sample=stream)
    return {k: int(out[0, -1, j]) for j, k in enumerate(observe)}


# ---------------------------------------------------------------------------
# exact enumeration

MAX_ENUM_STATES = 2_000_000
# bound on (states x successors per state) for a single time step
MAX_ENUM_WORK = 8_000_000


def _transitions(x, p, q):
    """All successor configurations of ``x`` with their probabilities."""
    results = [((), 1)]
    for k in range(len(x)):
        new = []
        for prefix, w in results:
            free = k == 0 or prefix[k - 1] != x[k] + 1
            if free:
                new.append((prefix + (x[k] + 1,), w * p))
                new.append((prefix + (x[k],), w * q))
            else:
                new.append((prefix + (x[k],), w))
        results = new
    return results


def exact_distribution(
    params: ModelParams, N: int, ghosts: int | None = None, exact: bool = False
) -> dict:
    """Exact law of ``(x_1(t), ..., x_N(t))`` by summing over all trajectories.

    Parameters
    ----------
    params : ModelParams
    N : int
        Number of labelled particles.
    ghosts : int or None
        As in :func:`simulate_batch`.
    exact : bool
        Use rational arithmetic (``p`` is converted with
        ``Fraction(p).limit_denominator(10**9)``).

    Returns
    -------
    dict
        Maps position tuples of particles ``1..N`` to probabilities.

    Raises
    ------
    TooLarge
        If the state space bound, or the work per time step, exceeds the
        enumeration budget.
    """
    t, d = params.t, params.d
    g = _resolve_ghosts(ghosts, t, d)
    P = N + g
    bound = min((t + 1) ** P, math.comb(t + P, P))
    if bound > MAX_ENUM_STATES or bound * 2**P > MAX_ENUM_WORK:
        raise TooLarge(f"enumeration with {P} particles to time {t} is too large")
    if exact:
        p = Fraction(params.p).limit_denominator(10**9)
        one = Fraction(1)
    else:
        p = float(params.p)
        one = 1.0
    q = one - p
    dist = {init_periodic(d, N, g).positions: one}
    for _ in range(t):
        new = {}
        for x, w in dist.items():
            for y, wy in _transitions(x, p, q):
                new[y] = new.get(y, 0) + w * wy
        dist = new
        if len(dist) > MAX_ENUM_STATES:
            raise TooLarge("enumeration state space exceeded")
    marg = {}
    for x, w in dist.items():
        key = x[g:]
        marg[key] = marg.get(key, 0) + w
    return marg


def _event(positions, query: JointQuery):
    if query.convention is Convention.GEQ:
        return all(positions[i - 1] >= a for i, a in zip(query.indices, query.thresholds))
    return all(positions[i - 1] <= a for i, a in zip(query.indices, query.thresholds))


def enumerate_exact(
    params: ModelParams,
    query: JointQuery,
    N: int | None = None,
    ghosts: int | None = None,
    exact: bool = False,
    distribution: dict | None = None,
):
    """Exact probability of a threshold event by brute-force enumeration.

    With the ``GEQ`` convention this is ``P(x_{sigma(k)}(t) >= a_k for all k)``;
    with ``LEQ`` it is ``P(x_{sigma(k)}(t) <= a_k for all k)``.

    A precomputed ``distribution`` from :func:`exact_distribution` may be
    passed to answer many queries without re-enumerating.

    Examples
    --------
    >>> enumerate_exact(ModelParams(0.5, 2, 1), JointQuery((1, 2), (1, -1)))
    0.25
    """
    if N is None:
        N = max(query.indices)
    if distribution is None:
        distribution = exact_distribution(params, N, ghosts, exact)
    total = 0 * next(iter(distribution.values()))
    for x, w in distribution.items():
        if _event(x, query):
            total += w
    return total


def empirical_joint_cdf(samples: Mapping[int, np.ndarray], query: JointQuery):
    """Fraction of samples in the query event and its binomial standard error.

    Parameters
    ----------
    samples : mapping
        Label -> 1-D array of sampled positions (all of equal length).
    query : JointQuery

    Returns
    -------
    (float, float)
    """
    cols = [np.asarray(samples[i]) for i in query.indices]
    n = cols[0].shape[0]
    if n < 2:
        raise ValueError("need at least two samples")
    hit = np.ones(n, dtype=bool)
    for c, a in zip(cols, query.thresholds):
        hit &= (c >= a) if query.convention is Convention.GEQ else (c <= a)
    f = hit.mean()
    return float(f), float(math.sqrt(f * (1 - f) / n))


# ---------------------------------------------------------------------------
# height function


def height_function(state: ParticleSystem, N_t: int, window) -> HeightProfile:
    """Height profile with slope -1 across occupied sites and +1 across empty ones.

    ``h(x+1) - h(x) = -1`` if site ``x`` is occupied and ``+1`` otherwise,
    anchored by ``h(0) = 2 N_t`` where ``N_t`` counts jumps across the bond
    ``(-1, 0)``. A jump from ``x`` to ``x+1`` then raises ``h(x+1)`` by 2 and
    leaves every other height unchanged.

    Parameters
    ----------
    state : ParticleSystem
        Occupations are known from the leftmost particle to ``+inf``.
    N_t : int
    window : (int, int)
        Inclusive range ``[lo, hi]`` of sites.

    Raises
    ------
    WindowUncovered
        If the profile would need occupations left of the leftmost particle.
    """
    lo, hi = int(window[0]), int(window[1])
    if hi < lo:
        raise ValueError("empty window")
    leftmost = state.positions[-1] if state.positions else 0
    if min(lo, 0) < leftmost:
        raise WindowUncovered(
            f"window [{lo}, {hi}] needs sites left of the leftmost particle at {leftmost}"
        )
    occ = set(state.positions)
    a, b = min(lo, 0), max(hi, 0)
    h = {0: 2 * int(N_t)}
    for x in range(0, b):
        h[x + 1] = h[x] + (-1 if x in occ else 1)
    for x in range(-1, a - 1, -1):
        h[x] = h[x + 1] - (-1 if x in occ else 1)
    return HeightProfile(int(N_t), lo, tuple(h[x] for x in range(lo, hi + 1)))


# ---------------------------------------------------------------------------
# speed


@dataclass(frozen=True)
class SpeedEstimate:
    """Speed of a bulk particle.

    Attributes
    ----------
    speed, stderr : float
        Slope of ``x(t) - x(0) = v t + c t^(1/3) + e`` fitted per trajectory
        over the recording window, averaged over trajectories.
    naive, naive_stderr : float
        Plain mean of ``(x(t) - x(0)) / t``; biased by the ``O(t^(1/3))``
        mean of the fluctuations.
    index : int
        Label of the tracked particle.
    """

    speed: float
    stderr: float
    naive: float
    naive_stderr: float
    index: int
    extra: dict = field(default_factory=dict, compare=False)


def bulk_index(params: ModelParams) -> int:
    """Label of a particle unaffected by the free leader up to time ``t``.

    Behind a free leader the density relaxes through a rarefaction fan whose
    trailing edge moves at the characteristic speed ``j'(1/d)`` of the flux
    ``j(rho) = p rho (1-rho) / (1 - p rho)``. A particle is in the bulk if it
    stays left of that edge, with a margin of ``2 t^(2/3)`` sites.
    """
    p, d, t = params.p, params.d, params.t
    rho = 1.0 / d
    edge = p * (1 - 2 * rho + p * rho * rho) / (1 - p * rho) ** 2
    gap = (params.speed - edge) * t + 2.0 * t ** (2.0 / 3.0)
    return int(math.ceil(gap / d)) + 2


def average_speed_estimate(
    params: ModelParams,
    N: int | None = None,
    n_samples: int = 1000,
    seed: int = 0,
    n_records: int = 16,
    threads: int = 1,
) -> SpeedEstimate:
    """Estimate the average speed of a bulk particle.

    Only particles ``1..N`` are simulated (free leader) and particle ``N``
    is tracked; ``N`` defaults to :func:`bulk_index`. Because the mean of
    the position fluctuations grows like ``t^(1/3)``, the displacement is
    fitted per trajectory as ``v t + c t^(1/3) + e`` on ``n_records`` equally
    spaced times in ``[t/4, t]`` and the slopes ``v`` are averaged.
    """
    t = params.t
    if t < 8:
        raise ValueError("t too small for a speed estimate")
    if N is None:
        N = bulk_index(params)
    times = np.unique(np.linspace(t / 4, t, n_records).round().astype(np.int64))
    pos, _ = simulate_batch(params, N, n_samples, seed, [N], ghosts=0, record_times=times, threads=threads)
    disp = pos[:, :, 0] - (-params.d * (N - 1))
    tt = times.astype(float)
    basis = np.column_stack([tt, tt ** (1.0 / 3.0), np.ones_like(tt)])
    coef, *_ = np.linalg.lstsq(basis, disp.T.astype(float), rcond=None)
    slopes = coef[0]
    naive = disp[:, -1] / t
    n = n_samples
    return SpeedEstimate(
        speed=float(slopes.mean()),
        stderr=float(slopes.std(ddof=1) / math.sqrt(n)),
        naive=float(naive.mean()),
        naive_stderr=float(naive.std(ddof=1) / math.sqrt(n)),
        index=N,
        extra={"c_mean": float(coef[1].mean())},
    )


# ---------------------------------------------------------------------------
# CSV output


def dump_samples_csv(samples: Mapping[int, np.ndarray], path) -> None:
    """Write ``run_id, particle_index, position`` rows."""
    labels = sorted(samples)
    n = len(samples[labels[0]]) if labels else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["run_id", "particle_index", "position"])
        for r in range(n):
            for k in labels:
                w.writerow([r, k, int(samples[k][r])])


def dump_height_csv(profile: HeightProfile, path) -> None:
    """Write ``x, h`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "h"])
        for x, h in zip(profile.xs, profile.heights):
            w.writerow([x, h])
