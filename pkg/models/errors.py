"""Error hierarchy shared by services, controllers and commands.

Every class carries the process exit code the CLI reports for it.
"""


class TwinError(Exception):
    """Base class for all domain errors"""

    exit_code = 1
    kind = 'internal'

    def to_dict(self):
        """Convert the error to a result dictionary"""
        return {
            'success': False,
            'error': self.__class__.__name__,
            'kind': self.kind,
            'details': str(self)
        }


class UsageError(TwinError):
    exit_code = 2
    kind = 'usage'


class ArgumentError(UsageError):
    pass


class ConfigurationError(UsageError):
    """Invalid configuration value; `field` names the offending key"""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class DataFormatError(TwinError):
    exit_code = 3
    kind = 'data-format'


class LoadError(DataFormatError):
    """Malformed run or calibration file, located by row and column"""

    def __init__(self, path, message, row=None, column=None):
        location = str(path)
        if row is not None:
            location += f", row {row}"
        if column is not None:
            location += f", column {column}"
        super().__init__(f"{location}: {message}")
        self.path = path
        self.row = row
        self.column = column


class UpsamplingError(DataFormatError):
    pass


class MergeError(DataFormatError):
    pass


class SpecMismatchError(DataFormatError):
    pass


class ContractError(DataFormatError):
    pass


class SchemaError(DataFormatError):
    pass


class SchemaVersionError(SchemaError):
    pass


class NumericError(TwinError):
    exit_code = 4
    kind = 'numeric'


class DegenerateRangeError(NumericError):
    pass


class RankDeficiencyError(NumericError):
    pass


class InsufficientHistoryError(NumericError):
    pass


class SliceTooShortError(NumericError):
    pass


class SolverError(TwinError):
    """The positive-definite solve failed; impossible for alpha > 0 in exact arithmetic"""
