"""Exception hierarchy.

Every user- or data-facing failure derives from :class:`IndicatorError`;
the CLI maps these to exit code 2 and anything else to exit code 1.
"""


class IndicatorError(Exception):
    """Base class for recoverable user/data errors."""


class OutOfRange(IndicatorError):
    pass


class InsufficientData(IndicatorError):
    pass


class ConfigMismatch(IndicatorError):
    pass


class UnknownParameter(IndicatorError):
    pass


class LengthMismatch(IndicatorError):
    pass


class InvalidSpec(IndicatorError):
    pass


class InvalidReport(IndicatorError):
    pass


class RangeMismatch(IndicatorError):
    pass


class EmptyData(IndicatorError):
    pass


class ParseError(IndicatorError):
    """Malformed file content. ``row`` and ``column`` are 1-based when known."""

    def __init__(self, message, path=None, row=None, column=None):
        self.path = path
        self.row = row
        self.column = column
        where = []
        if path is not None:
            where.append(str(path))
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class SchemaError(ParseError):
    """Structurally valid file that violates the dataset schema."""


class IoError(IndicatorError):
    pass
