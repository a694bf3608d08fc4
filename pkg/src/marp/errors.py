"""Exception hierarchy shared by all marp modules."""


class MarpError(Exception):
    """Base class for every error raised by marp."""


class InvalidParameterError(MarpError, ValueError):
    pass


class ParseError(MarpError, ValueError):
    """Malformed input file. Carries the offending field or line when known."""


class ValidationError(MarpError, ValueError):
    """Input parsed fine but breaks a structural invariant."""


class NoPathError(MarpError):
    pass


class SizeLimitError(MarpError):
    pass


class EmptySelectionError(MarpError, ValueError):
    pass


class InsufficientDataError(MarpError, ValueError):
    pass
