"""Exception hierarchy shared by every mhrev module."""


class MHRevError(Exception):
    """Base class for all library errors."""


class InvalidKernel(MHRevError, ValueError):
    """A matrix or vector fails the invariants of its declared type."""


class DimensionMismatch(MHRevError, ValueError):
    pass


class BadParams(MHRevError, ValueError):
    pass


class ReducibleChain(MHRevError):
    pass


class NonPositiveStationary(MHRevError):
    pass


class NotStationary(MHRevError):
    pass


class NotReversibleBase(MHRevError):
    pass


class NotSelfAdjoint(MHRevError):
    pass


class NoConvergence(MHRevError):
    pass


class PreconditionViolated(MHRevError):
    pass


class ReconstructionMismatch(MHRevError):
    pass


class ZeroGap(MHRevError):
    pass


class SingularResolvent(MHRevError):
    pass


class BadTruncation(MHRevError):
    pass


class AssumptionViolated(MHRevError):
    """The dominant-eigenvalue split needed by a metastability bound fails."""


class DegenerateSet(MHRevError, ValueError):
    pass


class TooLarge(MHRevError, ValueError):
    pass


class InvariantViolation(MHRevError):
    """A proven inequality failed numerically; signals a bug or bad input."""
