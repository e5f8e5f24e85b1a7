"""Exception types raised by triq."""


class TriqError(Exception):
    """Base class for all triq errors."""


class ZeroState(TriqError, ValueError):
    """The amplitude vector has (numerically) zero norm."""


class NullOutcome(TriqError):
    """A measurement outcome annihilates the state."""

    def __init__(self, message, probability=0.0):
        super().__init__(message)
        self.probability = probability


class DegreeTooLarge(TriqError, ValueError):
    """Requested polynomial invariant degree exceeds the brute-force cap."""


class SingularInversion(TriqError):
    """The invariant-to-DD inversion is singular (J1 + J4 vanishes)."""


class NonPhysical(TriqError):
    """Invariants do not correspond to any physical state."""


class DegenerateGamma(TriqError):
    """The outcome rotation U_i is undefined (gamma ~ 0) although the outcome has weight."""


class NoConvergence(TriqError):
    """No optimizer start met the stopping criterion."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
