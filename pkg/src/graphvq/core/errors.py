"""Shared exception types for graphvq"""


class GraphVQError(Exception):
    """Base class for all graphvq errors"""

    pass


class ContractViolationError(GraphVQError, ValueError):
    """Raised when a caller breaks an operation's precondition (e.g. dimension mismatch)"""

    pass


class ParameterError(GraphVQError, ValueError):
    """Raised when a parameter value is outside its valid range"""

    pass


class EmptyStoreError(GraphVQError, ValueError):
    """Raised when an operation needs a non-empty store, graph or index"""

    pass


class FormatError(GraphVQError, ValueError):
    """Raised when a binary file is corrupt, truncated or of an unsupported version"""

    pass


class IntegrityError(FormatError):
    """Raised when the parts of a well-formed file disagree with each other"""

    pass
