"""Exception types shared across the toolkit."""


class TwincrError(Exception):
    """Base class for all toolkit errors."""


class InputError(TwincrError):
    """Malformed user input (bad file, bad word, bad matrix)."""


class UnknownGenerator(InputError):
    pass


class SystemMismatch(TwincrError):
    pass


class SignMismatch(TwincrError):
    pass


class NotSpherical(TwincrError):
    pass


class CapExceededInconclusive(TwincrError):
    """An enumeration hit its element cap without closing; raise the cap."""


class CapExceeded(TwincrError):
    """A walk or sweep hit its step cap; carries any partial result."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class RadiusTooSmall(TwincrError):
    pass


class NotBallComplete(TwincrError):
    pass


class EmptyComponent(TwincrError):
    pass


class NotOpposite(TwincrError):
    pass


class NotASummand(TwincrError):
    pass


class NotInvariant(TwincrError):
    pass


class PreconditionNotCR(TwincrError):
    pass


class DepthExceeded(TwincrError):
    pass


class NotInteriorRepresentable(TwincrError):
    pass


class UnsupportedRank(TwincrError):
    pass


class SpinClosureCapExceeded(TwincrError):
    """Spinning over the function field failed to stabilize under the degree cap."""
