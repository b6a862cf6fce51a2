"""Exception hierarchy.

The three top-level families map onto the CLI exit codes: configuration
problems exit with 2, bad or insufficient data with 3, and failures while
fitting a model with 4.
"""


class AdhocError(Exception):
    exit_code = 1


class ConfigError(AdhocError, ValueError):
    exit_code = 2


class DataError(AdhocError, ValueError):
    exit_code = 3


class TrainingError(AdhocError, ValueError):
    exit_code = 4


class EmptyVocabularyError(DataError):
    pass


class InsufficientDataError(DataError):
    pass


class MissingDateError(DataError):
    pass


class DegenerateRegressorError(DataError):
    pass


class DegenerateLabelsError(TrainingError):
    pass


class EmptyHeadlineError(DataError):
    pass


class ShapeError(AdhocError, ValueError):
    pass


class ModelLoadError(AdhocError, ValueError):
    exit_code = 3
