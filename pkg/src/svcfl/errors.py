"""Exception types raised across the package."""


class SvcflError(Exception):
    """Base class for all package errors."""


class SchemaError(SvcflError):
    pass


class CellError(SvcflError):
    """A cell could not be parsed. Carries 1-based data-row and column name."""

    def __init__(self, row, column, value, reason="unparseable value"):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"row {row}, column {column!r}: {reason} {value!r}")


class ImputationError(SvcflError):
    pass


class StratificationError(SvcflError):
    pass


class ShapeError(SvcflError, ValueError):
    pass


class TrainingError(SvcflError):
    def __init__(self, message, client_id=None):
        self.client_id = client_id
        if client_id is not None:
            message = f"client {client_id}: {message}"
        super().__init__(message)


class NumericError(SvcflError, ValueError):
    pass


class DegenerateNodeError(SvcflError, ValueError):
    pass


class FederationSchemaError(SvcflError):
    pass


class EmptyRoundError(SvcflError):
    pass


class ProtocolError(SvcflError):
    """Malformed wire message. ``offset`` is the byte position of the fault."""

    def __init__(self, message, offset=0):
        self.offset = offset
        super().__init__(f"{message} (at byte {offset})")


class EmptyEvalError(SvcflError, ValueError):
    pass
