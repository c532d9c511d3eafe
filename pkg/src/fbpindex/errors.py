"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operands have incompatible lengths or shapes."""


class ConfigurationError(ValueError):
    """A scheme, index, or run configuration is invalid or inconsistent."""


class EnrollmentError(ValueError):
    """An enrolment batch cannot be indexed (e.g. duplicate subject ids)."""


class ProtocolError(ValueError):
    """An evaluation protocol precondition does not hold."""


class DataFormatError(ValueError):
    """A dataset or index file is malformed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
