"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the domain an operation is defined on."""


class NumericalError(RuntimeError):
    """A numerical routine failed or produced an invalid result."""


class ConfigError(ValueError):
    """A scan configuration file is malformed or inconsistent.

    ``location`` points at the offending field ("grid.k") or file line.
    """

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)
