"""Parameter and query types shared by the simulator and the kernels."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

__all__ = ["ModelParams", "Convention", "JointQuery", "light_cone_ghosts"]


@dataclass(frozen=True)
class ModelParams:
    """Hop probability ``p``, period ``d`` and time horizon ``t``."""

    p: float
    d: int
    t: int

    def __post_init__(self):
        if not (0.0 < float(self.p) < 1.0):
            raise ValueError(f"p must lie in (0, 1), got {self.p}")
        if int(self.d) != self.d or self.d < 2:
            raise ValueError(f"d must be an integer >= 2, got {self.d}")
        if int(self.t) != self.t or self.t < 0:
            raise ValueError(f"t must be a nonnegative integer, got {self.t}")

    @property
    def speed(self) -> float:
        """Mean particle speed ``p(d-1)/(d-p)``."""
        return self.p * (self.d - 1) / (self.d - self.p)


class Convention(str, Enum):
    """Which event a threshold query describes.

    ``GEQ``: ``x_k(t) >= a_k`` for all k, with the projector onto ``x < a_k``.
    ``LEQ``: ``x_k(t) <= a_k`` for all k, with the projector onto ``x > a_k``.
    """

    GEQ = "geq"
    LEQ = "leq"


@dataclass(frozen=True)
class JointQuery:
    """Particle indices ``sigma(1) < ... < sigma(m)`` with thresholds ``a_k``."""

    indices: tuple
    thresholds: tuple
    convention: Convention = Convention.GEQ

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        thr = tuple(int(a) for a in self.thresholds)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "thresholds", thr)
        object.__setattr__(self, "convention", Convention(self.convention))
        if len(idx) == 0:
            raise ValueError("a query needs at least one particle")
        if len(idx) != len(thr):
            raise ValueError("indices and thresholds must have equal length")
        if idx[0] < 1 or any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"indices must be strictly increasing and >= 1, got {idx}")

    @property
    def m(self) -> int:
        return len(self.indices)


def light_cone_ghosts(t: int, d: int) -> int:
    """Number of particles to the right of particle 1 that can affect it by time ``t``.

    Particle ``1 - j`` (initially at ``d*j``) can influence particle 1 only
    after ``j`` successive gaps of ``d - 1`` empty sites have been closed and
    one more blocked step has occurred, which needs ``j (d-1) <= t - 1``.
    Keeping ``floor((t-1)/(d-1))`` extra particles therefore reproduces the
    system on the whole sublattice ``dZ`` exactly up to time ``t``.
    """
    if t <= 0:
        return 0
    return (t - 1) // (d - 1)
