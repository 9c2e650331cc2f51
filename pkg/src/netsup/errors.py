"""Exception hierarchy. Each class carries the error code used in CLI reports."""


class NetsupError(Exception):
    code = "ERROR"


class EmptyList(NetsupError):
    code = "EMPTY_LIST"


class MalformedAutomaton(NetsupError):
    code = "MALFORMED_AUTOMATON"


class UnknownEvent(NetsupError):
    code = "UNKNOWN_EVENT"


class InvalidCapacity(NetsupError):
    code = "INVALID_CAPACITY"


class InvalidParams(NetsupError):
    code = "INVALID_PARAMS"


class ConstraintViolation(NetsupError):
    code = "CONSTRAINT_VIOLATION"


class LimitExceeded(NetsupError):
    code = "LIMIT_EXCEEDED"


class MissingAnnotations(NetsupError):
    code = "MISSING_ANNOTATIONS"


class AlphabetConflict(NetsupError):
    code = "ALPHABET_CONFLICT"


class ParseError(NetsupError):
    code = "PARSE_ERROR"
