"""Exception hierarchy shared by all dynot modules."""


class DynotError(Exception):
    """Base class for every error raised by this package."""


class ShapeMismatch(DynotError, ValueError):
    pass


class MassMismatch(DynotError, ValueError):
    pass


class ZeroMass(DynotError, ValueError):
    pass


class DimensionMismatch(DynotError, ValueError):
    pass


class InvalidParams(DynotError, ValueError):
    pass


class EmptyHue(DynotError, ValueError):
    pass


class NonConvergence(DynotError, RuntimeError):
    """The cubic root finder in the prox step missed its tolerance."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class IoError(DynotError, OSError):
    pass


class UnsupportedFormat(IoError):
    pass


class BadMagic(IoError):
    pass


class SizeMismatch(IoError):
    pass
