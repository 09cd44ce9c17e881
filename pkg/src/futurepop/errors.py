"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class FuturePopError(Exception):
    exit_code = 1
    kind = "error"


class InputError(FuturePopError, ValueError):
    """Malformed or inconsistent input data."""

    exit_code = 2
    kind = "input"


class NumericalError(FuturePopError, ArithmeticError):
    """A numerical routine could not produce a valid result."""

    exit_code = 3
    kind = "numerical"


class ConfigError(FuturePopError, ValueError):
    """Invalid configuration value, unknown backend, or size guard tripped."""

    exit_code = 4
    kind = "config"


class BackendNotBundledError(ConfigError):
    """A named solver backend exists in the contract but is not shipped here."""
