"""Exception hierarchy.

CLI exit-code contract: SwcParseError and parameter validation problems are
input errors (exit 2); everything else raised mid-computation is an analysis
error (exit 1).
"""


class ArbortopoError(Exception):
    """Base class for all library errors."""


class SwcParseError(ArbortopoError):
    """Malformed or structurally invalid SWC input.

    ``line`` is the 1-based line number when the problem is tied to one.
    """

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        loc = ""
        if path is not None:
            loc += str(path)
        if line is not None:
            loc += f":{line}"
        super().__init__(f"{loc}: {message}" if loc else message)


class TreeInvariantError(ArbortopoError):
    """A canonical-tree structural invariant does not hold."""


class UndefinedPartitionError(ArbortopoError):
    """partition_asymmetry called with the excluded (1, 1) partition."""


class DivergenceError(ArbortopoError):
    """Branching parameters give a supercritical (non-finite-mean) process."""


class TruncationError(ArbortopoError):
    """A generated tree hit the max_order safety cap.

    Never silently truncated: carries the seed and model repr so the run is
    reproducible.
    """

    def __init__(self, message, seed=None, index=None):
        self.seed = seed
        self.index = index
        super().__init__(message)


class FitError(ArbortopoError):
    """Nonlinear fit failed to converge from every start point."""
