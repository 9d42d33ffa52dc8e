"""Exception hierarchy shared by every sigkit module."""


class SigkitError(ValueError):
    """Base class for input and invariant errors raised by sigkit."""


class NotSemicoherent(SigkitError):
    """A truth table is not monotone or violates the boundary values.

    ``witness`` is ``(A, B)`` with ``A`` a subset of ``B`` and ``phi(A) > phi(B)``
    for a monotonicity failure, or the offending subset for a boundary failure.
    Subsets are reported as sorted tuples of 1-indexed components.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class SizeLimitExceeded(SigkitError):
    pass


class EmptyPathList(SigkitError):
    pass


class PathOutOfRange(SigkitError):
    pass


class OutOfRange(SigkitError):
    pass


class DimensionMismatch(SigkitError):
    pass


class SubsetOutOfRange(SigkitError):
    pass


class EmptySetList(SigkitError):
    pass


class InvariantViolation(SigkitError):
    """A computed or supplied object broke one of its invariants.

    ``index`` carries the offending position when there is one (e.g. the
    signature coordinate ``k`` that came out negative).
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class TieResampleExhausted(SigkitError):
    pass
