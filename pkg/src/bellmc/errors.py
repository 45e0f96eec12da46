"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: config-file syntax errors are exit 2,
configuration problems are exit 3, and everything raised while a run is in
flight is exit 4.
"""


class BellmcError(Exception):
    """Base class for all package errors."""


class ConfigParseError(BellmcError):
    """Config file is not syntactically valid; carries line/column context."""


class ConfigurationError(BellmcError):
    """Invalid parameter values or malformed run configuration."""


class GeometryError(BellmcError):
    """A ray cannot be propagated to the polarizer planes."""

    def __init__(self, message, event_index=None):
        super().__init__(message)
        self.event_index = event_index


class StatisticsError(BellmcError):
    """Too few events (or otherwise unusable statistics) requested."""


class AnalysisError(BellmcError):
    """Inconsistent inputs to a statistics computation."""


class OracleApplicabilityError(BellmcError):
    """An exact oracle was asked to verify a model outside its domain."""


class ResourceError(BellmcError):
    """A deterministic computation would exceed its resource guard."""
