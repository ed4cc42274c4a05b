"""
Domain exceptions and their CLI exit codes
"""
from typing import Optional

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG_ERROR = 2
EXIT_DATA_ERROR = 3
EXIT_VERIFICATION_FAILED = 4


class CiidError(Exception):
    """Base class for every error raised by the library."""

    exit_code: int = EXIT_UNEXPECTED


# ---------------------------------------------------------------------------
# Configuration errors
# ---------------------------------------------------------------------------

class ConfigError(CiidError):
    exit_code = EXIT_CONFIG_ERROR


class InvalidParameters(ConfigError):
    pass


class ConfigFileError(ConfigError):
    def __init__(self, path: str, message: str, line: Optional[int] = None):
        self.path = path
        self.line = line
        where = f"{path}:{line}" if line is not None else path
        super().__init__(f"{where} : {message}")


# ---------------------------------------------------------------------------
# Data errors
# ---------------------------------------------------------------------------

class DataError(CiidError):
    exit_code = EXIT_DATA_ERROR


class EmptyGroup(DataError):
    """An estimator needs a group that has no samples."""


class EmptyTargetGroup(DataError):
    """A training scheme targets a group or cluster with no training rows."""


class TooFewSamples(DataError):
    pass


class TooFewRows(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class LengthMismatch(DataError):
    pass


class NonFiniteFeatures(DataError):
    pass


class UnknownColumn(DataError):
    pass


class MissingColumn(DataError):
    pass


class EmptyDataset(DataError):
    pass


class UnseenGroup(DataError):
    """A routed test row belongs to a group that had no learner at train time."""


class InsufficientDefinedCells(DataError):
    pass


class UnparsableCell(DataError):
    def __init__(self, row: int, column: str, value: str):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"Unparsable cell : row={row} , column={column} , value={value!r}")


class MalformedCsv(DataError):
    """The file is not a readable CSV: bad encoding, ragged rows or no content."""

    def __init__(self, path: str, message: str, line: Optional[int] = None):
        self.path = path
        self.line = line
        where = f"{path}:{line}" if line is not None else path
        super().__init__(f"{where} : {message}")
