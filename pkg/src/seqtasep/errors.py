"""Exception types shared across the package."""


class TasepError(Exception):
    """Base class for all errors raised by this package."""


class NonConvergence(TasepError):
    """A refinement loop (nodes, window, resolution) hit its cap."""


class Degenerate(TasepError):
    """A nontrivial root of the offspring equation coincides with ``v``."""


class ResidualImaginary(TasepError):
    """A kernel value came back with a non-negligible imaginary part."""


class InsufficientParticles(TasepError):
    pass


class TooLarge(TasepError):
    """Brute-force enumeration requested beyond its configured size."""


class WindowUncovered(TasepError):
    pass


class IndexOutOfRange(TasepError):
    pass


class DomainTooLarge(TasepError):
    pass
