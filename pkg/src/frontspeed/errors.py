"""Error taxonomy shared across modules; the CLI maps these to exit codes."""


class ConfigError(ValueError):
    """Invalid configuration, distribution spec or parameter bound (exit 2)."""


class NumericError(RuntimeError):
    """Solver or quadrature failed to reach the requested tolerance (exit 3)."""

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class InsufficientDataError(RuntimeError):
    """A diagnostic observed too few events to report (exit 4)."""
