"""Exception types shared across the package.

The split matters for the command line front end: configuration problems
exit with code 2, numerical failures with code 1.
"""


class ConfigError(ValueError):
    """Invalid configuration, layout request, or malformed input file."""


class TruncationError(ValueError):
    """A Fock-space truncation is too small for the requested state."""


class IntegrationError(RuntimeError):
    """A propagation run violated a norm, trace, or positivity guard."""


class ConvergenceError(RuntimeError):
    """An optimization or constraint solve did not reach its tolerance."""
