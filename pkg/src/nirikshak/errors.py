"""Exception hierarchy shared across the engine."""


class NirikshakError(Exception):
    pass


class ConfigError(NirikshakError):
    """Bad user description or run configuration."""


class SchemaError(ConfigError):
    pass


class EndpointError(ConfigError):
    pass


class TemplateError(ConfigError):
    pass


class GenerationError(NirikshakError):
    """Could not manufacture a fresh instance (id space exhausted)."""


class PoolExhaustedError(NirikshakError):
    pass


class SetupError(NirikshakError):
    """Setup hook failed; the run cannot proceed."""


class LogFormatError(NirikshakError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class TransportError(NirikshakError):
    """A request could not complete and the run was configured to stop."""
