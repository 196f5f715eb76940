"""Exception hierarchy.  Each failure mode reported by the runner has its own class."""


class ErgolabError(Exception):
    """Base class for all library errors."""

    code = "error"


class InvalidParameterError(ErgolabError, ValueError):
    code = "invalid-parameter"


class CapExceededError(ErgolabError):
    """A dimension, level-count or stage cap would be exceeded."""

    code = "cap-exceeded"


class NotSettledError(ErgolabError):
    """The rank-one map is not yet defined on part of the requested set."""

    code = "not-settled"


class UnknownKindError(ErgolabError, KeyError):
    code = "unknown-kind"

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown experiment kind"


class ConfigSyntaxError(ErgolabError, ValueError):
    code = "config-syntax"
