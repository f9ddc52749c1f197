"""Exception types shared across the package.

Two failure categories matter to callers (and map to CLI exit codes):
bad inputs or configuration, and numerical breakdown at runtime.
"""


class InputError(ValueError):
    """Invalid argument, shape, or configuration value."""


class NumericError(ArithmeticError):
    """A computation produced non-finite values or lost all precision."""
