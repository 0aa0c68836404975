"""Exception hierarchy.

Two families matter to callers: :class:`InputError` for anything wrong with
files, configuration or arguments, and :class:`ComputationError` for numeric
failures inside otherwise valid input. The CLI maps them to exit codes 2 and 3.
"""


class Stock2VecError(Exception):
    """Base class for every error raised by this package."""


class InputError(Stock2VecError):
    pass


class ComputationError(Stock2VecError):
    pass


class InputFileNotFound(InputError, FileNotFoundError):
    pass


class MalformedHeader(InputError):
    pass


class EmptyInput(InputError):
    pass


class DuplicateTicker(InputError):
    pass


class EmptyIntersection(InputError):
    pass


class EmptyPanel(InputError):
    pass


class EmptyCorpus(InputError):
    pass


class DegenerateSentence(InputError):
    pass


class EmptyVocabulary(InputError):
    pass


class UnknownToken(InputError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class FormatError(InputError):
    pass


class ConfigError(InputError):
    pass


class TooFewRows(InputError):
    pass


class ClassTooSmall(InputError):
    pass


class EmptyClass(InputError):
    pass


class SingleClass(InputError):
    pass


class FeatureMismatch(InputError):
    pass


class MissingSector(InputError):
    pass


class JoinEmpty(InputError):
    pass


class TooFewObservations(InputError):
    pass


class IndexOutOfRange(InputError, IndexError):
    pass


class RankDeficient(ComputationError):
    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class DegenerateInput(ComputationError):
    pass
