"""Exception types shared across the package.

The CLI maps these onto its exit-code scheme: usage problems (bad group
strings, mismatched lattices) exit 2, enumeration limits exit 3, and file
or payload problems exit 4.
"""


class NormInfError(Exception):
    """Base class for all errors raised by this package."""


class GroupSpecError(NormInfError, ValueError):
    """Invalid group description (empty, duplicate or non-prime factors)."""


class LatticeMismatchError(NormInfError, ValueError):
    """Two values that must live on the same lattice do not."""


class NotSquarefreeError(NormInfError, ValueError):
    """Operation defined only for squarefree groups (cube lattices)."""


class IntervalError(NormInfError, ValueError):
    """Invalid interval request (endpoints not nested, or a single point)."""


class CeilingExceededError(NormInfError, RuntimeError):
    """Candidate space too large for the exhaustive engine."""


class CatalogueError(NormInfError, ValueError):
    """Catalogue file is malformed or does not match its lattice."""
