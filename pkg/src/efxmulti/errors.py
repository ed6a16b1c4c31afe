"""Exception types shared across the package."""


class EfxError(Exception):
    """Base class for all errors raised by efxmulti."""


class InstanceError(EfxError, ValueError):
    """Malformed multigraph input (self-loop, bad endpoint, bad params)."""


class ValuationError(EfxError, ValueError):
    """Malformed or unsupported valuation input."""


class NonMonotoneError(EfxError, ValueError):
    """A search that must succeed for monotone valuations came up empty."""


class PreconditionError(EfxError, ValueError):
    """An operation was called outside its documented precondition."""


class NoApplicableRegime(EfxError):
    """None of the three structural regimes applies to the instance."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InvariantBreach(EfxError, RuntimeError):
    """A proof-backed runtime invariant failed. Always a bug signal."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class FormatError(EfxError, ValueError):
    """A text file could not be parsed. Carries the 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
