"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid construction parameters (grid sizes, experiment config)."""


class UsageError(ValueError):
    """Operation applied to data in the wrong state (space tag, grid mismatch)."""


class GridTooSmallError(RuntimeError):
    """Evolved field no longer fits the grid; results would alias."""


class BlowupAbort(RuntimeError):
    """Solver aborted on the focusing blow-up proxy (sup-norm overflow)."""
