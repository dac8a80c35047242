class BiographError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(BiographError):
    """Malformed input document; carries a position when known."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}" + (
                f", column {column})" if column is not None else ")"
            )
        super().__init__(message)
        self.line = line
        self.column = column


class IntegrityError(BiographError):
    """A structural invariant was violated."""
