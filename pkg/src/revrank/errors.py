"""Exception types raised by revrank.

Everything derives from :class:`RevrankError` so callers (and the CLI) can
catch validation problems in one place without swallowing genuine bugs.
"""


class RevrankError(Exception):
    """Base class for all validation and configuration errors."""


class ConfigError(RevrankError):
    """An impossible or inconsistent option combination was requested."""


class EmptyCorpusError(RevrankError):
    """A corpus was empty (or too small for the requested statistic)."""


class EmptyInputError(RevrankError):
    """An operation received an empty token list, caption set, or text."""


class MissingLMError(ConfigError):
    """A language model was required by the selected mode but not supplied."""


class MissingContextError(RevrankError):
    """An informativeness computation was called with no evidence contexts."""


class ParseError(RevrankError):
    """A data file line could not be parsed."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class DimensionMismatchError(ParseError):
    """An embedding row had the wrong number of components."""


class EmptyTableError(RevrankError):
    """An embedding file contained no usable vectors."""


class OOVTokenError(RevrankError, KeyError):
    """A token was not found and the strict out-of-vocabulary policy applies."""

    def __init__(self, token):
        super().__init__(f"out-of-vocabulary token: {token!r}")
        self.token = token


class DuplicateKeyError(RevrankError):
    """A similarity file contained the same (image, rank, context) key twice."""


class MissingSimilarityError(RevrankError, KeyError):
    """A similarity lookup missed; callers normally back off to no revision."""


class MissingReferencesError(RevrankError):
    """An item had no reference captions where references are mandatory."""


class MisalignedInputsError(RevrankError):
    """Two paired systems disagree on item ids or references."""
