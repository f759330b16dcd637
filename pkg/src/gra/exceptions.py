"""Exception hierarchy. Each top-level family carries the CLI exit code it maps to."""


class GRAError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigError(GRAError):
    exit_code = 2


class DataError(GRAError):
    exit_code = 3


class ParseError(DataError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class ConsistencyError(DataError):
    pass


class EmptySplitError(DataError):
    pass


class SamplingError(DataError):
    pass


class TrainingError(GRAError):
    exit_code = 4

    def __init__(self, message, epoch=None):
        self.epoch = epoch
        if epoch is not None:
            message = f"epoch {epoch}: {message}"
        super().__init__(message)


class EvaluationError(GRAError):
    exit_code = 5


class NonFiniteError(DataError, ValueError):
    pass


class ShapeError(GRAError, ValueError):
    exit_code = 3


class DimensionError(GRAError, ValueError):
    exit_code = 3


class DegenerateNormalizationError(GRAError, ValueError):
    exit_code = 4
