class QPError(Exception):
    """Base class for errors raised by qpcover."""


class StructureError(QPError):
    """Objects that should live over the same quiver or seed do not."""


class ValidationError(QPError):
    """Input data violates an invariant; ``witness`` names the offender."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class PreconditionError(QPError):
    pass


class ResourceError(QPError):
    pass


class InconclusiveError(QPError):
    pass


class ParseError(QPError):
    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.line = line
        self.column = column
