"""Exception types shared across the toolkit."""


class TableQAError(Exception):
    """Base class for every error raised by this package."""


class MalformedInput(TableQAError):
    """Input document could not be parsed at all."""


class RaggedRows(MalformedInput):
    """A data row does not have exactly one cell per header."""


class EmptyTable(MalformedInput):
    """Table has no headers or no data rows."""


class TypeMismatch(TableQAError):
    """Numeric aggregate requested on a text column."""


class EmptyAggregate(TableQAError):
    """Avg/Max/Min over zero matched values."""


class EmptyCorpus(TableQAError):
    """An operation that needs training data received none."""


class Unsatisfiable(TableQAError):
    """No WHERE clause set matching at least one row was found in budget."""


class CheckFailed(TableQAError):
    """A quality check could not be evaluated (executor error underneath)."""


class SerializationError(TableQAError):
    """Query/answer/table triple violates the generator input contract."""


class MalformedQGInput(TableQAError):
    """Generator input text violates the token format.

    ``offset`` is the byte offset of the first violation.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class EmptySentence(TableQAError):
    """Sentence has no tokens after normalization."""


class EmptyCandidates(TableQAError):
    """Reranking requested on an empty candidate list."""


class DegenerateLabels(TableQAError):
    """Classifier training data contains a single label class."""


class Unreachable(TableQAError):
    """No main topic is reachable from the article in the category graph."""


class UnknownTopic(TableQAError):
    """Topic name absent from the assignment map."""


class UnknownTopicGroup(TableQAError):
    """Topic group absent from the instance list."""


class EmptyInput(TableQAError):
    """Operation received an empty corpus or list where one is required."""


class LengthMismatch(TableQAError):
    """Prediction and gold lists are not index-aligned."""
