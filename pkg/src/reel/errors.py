"""Exception types shared across the package.

The CLI maps these onto exit codes: usage errors exit 1, data/format
errors exit 2, numerical divergence exits 3.
"""


class ReelError(Exception):
    """Base class for package errors."""


class GridMismatchError(ReelError, ValueError):
    """Two fields/masks that must share a grid do not."""


class DataFormatError(ReelError, ValueError):
    """A dataset file is malformed (bad magic, version, or truncation)."""


class DivergenceError(ReelError, RuntimeError):
    """A simulation or training run produced non-finite or runaway values."""
