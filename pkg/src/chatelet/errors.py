"""Exception types shared across the package.

The CLI maps these onto exit codes: ArgumentError -> 1, ResourceError -> 2,
VerificationError -> 3.
"""


class ArgumentError(ValueError):
    """An input violates an operation's precondition."""


class ResourceError(RuntimeError):
    """A configured size limit (coordinate digits, group order cap) was exceeded."""


class UnsupportedFiberError(ArgumentError):
    """The requested fiber has no model in this toolkit (odd-degree fiber at infinity)."""


class ClassificationError(RuntimeError):
    """A finite group could not be matched to any known isomorphism type."""


class VerificationError(AssertionError):
    """A group-theoretic or arithmetic check that should hold did not."""
