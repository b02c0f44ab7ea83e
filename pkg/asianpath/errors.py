class AsianPathError(Exception):
    """Base class for every error raised by the library."""


class ParameterError(AsianPathError, ValueError):
    pass


class ConfigurationError(AsianPathError, ValueError):
    """Option kind, dynamics and simulation config do not fit together."""


class DegenerateCorrelationError(AsianPathError):
    def __init__(self, rho: float):
        super().__init__(f"correlation rho={rho} is degenerate (|rho| must be < 1)")
        self.rho = rho


class DomainError(AsianPathError):
    """A formula was evaluated outside the region where it is defined."""

    def __init__(self, message: str, **coordinates):
        if coordinates:
            where = ", ".join(f"{k}={v}" for k, v in coordinates.items())
            message = f"{message} ({where})"
        super().__init__(message)
        self.coordinates = coordinates
