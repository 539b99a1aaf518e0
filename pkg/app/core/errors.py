"""Exception hierarchy shared by the core modules and the CLI.

Each class carries the process exit code the CLI reports for it.
"""


class RealEnumError(Exception):
    exit_code = 2


# Input problems (exit 2)
class InputError(RealEnumError, ValueError):
    exit_code = 2


class DomainError(InputError):
    """Class outside the domain of the node-count formula."""


class EmptyClassError(InputError):
    """Class whose polygon has no floors."""


class UnsupportedSurfaceError(InputError):
    pass


class MarkingError(InputError):
    """Point count does not match the markable elements of a diagram."""


class SchemaError(InputError):
    pass


# Internal consistency (exit 3)
class ConsistencyError(RealEnumError):
    exit_code = 3


class ModelConsistencyError(ConsistencyError):
    """Homology model violates one of its structural invariants."""
