"""Exception hierarchy shared by every module."""


class CrpqError(Exception):
    """Base class for all library errors."""


class RegexSyntaxError(CrpqError, ValueError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class UnknownLetterError(CrpqError, ValueError):
    pass


class QuerySyntaxError(CrpqError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ArityError(CrpqError, ValueError):
    pass


class GraphFormatError(CrpqError, ValueError):
    pass


class UnknownStateError(CrpqError, KeyError):
    pass


class ResourceLimitError(CrpqError, RuntimeError):
    """A hard combinatorial cap was hit; ``partial`` carries progress made so far."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class FragmentError(CrpqError, ValueError):
    """Input lies outside the fragment a decision procedure requires."""


class PreconditionError(CrpqError, ValueError):
    pass


class NotAnExpansionError(CrpqError, ValueError):
    pass
