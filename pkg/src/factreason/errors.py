"""Exception hierarchy shared by all factreason modules."""

from __future__ import annotations


class FactReasonError(Exception):
    """Base class for every error raised by this package."""


# -- graphical models / inference -------------------------------------------


class TooManyVariablesError(FactReasonError):
    pass


class ZeroPartitionError(FactReasonError):
    """The model assigns zero mass to every assignment."""


class WidthExceededError(FactReasonError):
    pass


class InvalidModelError(FactReasonError):
    pass


class UaiParseError(FactReasonError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UnsupportedCardinalityError(UaiParseError):
    pass


# -- model construction -----------------------------------------------------


class UnknownIdError(FactReasonError):
    pass


class DuplicateVariableError(FactReasonError):
    pass


# -- LLM / retrieval --------------------------------------------------------


class TransportError(FactReasonError):
    """A request failed after exhausting its retries."""


class QuotaError(TransportError):
    """The provider refused the request because a usage quota is exhausted."""


class UnparseableReplyError(FactReasonError):
    def __init__(self, message: str, reply: str = ""):
        super().__init__(message)
        self.reply = reply


class MissingLogprobsError(FactReasonError):
    pass


class EmptyDecompositionError(FactReasonError):
    pass


class StageError(FactReasonError):
    """Wraps a failure with the pipeline stage and the ids it was working on."""

    def __init__(self, stage: str, ids: tuple[str, ...], cause: BaseException):
        joined = ", ".join(ids) if ids else "-"
        super().__init__(f"{stage} failed for [{joined}]: {cause}")
        self.stage = stage
        self.ids = ids
        self.__cause__ = cause


# -- datasets ---------------------------------------------------------------


class DatasetError(FactReasonError):
    def __init__(self, message: str, line: int, field: str | None = None):
        where = f"line {line}" + (f", field {field!r}" if field else "")
        super().__init__(f"{where}: {message}")
        self.line = line
        self.field = field
