"""Exception types shared across the package.

The command-line front end maps ``ParameterError`` to exit status 2 and
``NumericalError`` to exit status 3.
"""


class ParameterError(ValueError):
    """An argument lies outside the domain of the requested operation."""


class NumericalError(ArithmeticError):
    """A numerical routine failed to converge or produced an unusable result."""
