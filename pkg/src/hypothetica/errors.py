"""Exception hierarchy.

Everything raised deliberately by this package derives from
:class:`HypotheticaError`, so callers (including the CLI) can distinguish
diagnosable analysis failures from programming errors.
"""


class HypotheticaError(Exception):
    """Base class for all errors raised by hypothetica."""


class CsvFormatError(HypotheticaError):
    """A CSV cell or header could not be parsed."""


class SchemaError(HypotheticaError):
    """Input columns do not match the expected wide-format schema."""


class DataValidationError(HypotheticaError):
    """A dataset violates a structural invariant (e.g. monotone observation)."""


class SingularDesignError(HypotheticaError):
    """Design matrix is rank deficient (or has too few rows to fit)."""


class DegenerateResponseError(HypotheticaError):
    """A binary response contains only one class."""


class WeightModelError(HypotheticaError):
    """A weight model failed to converge; carries the fit diagnostics."""


class PositivityError(HypotheticaError):
    """A fitted or supplied probability is numerically zero where positivity is required."""


class EstimationError(HypotheticaError):
    """An estimator could not be computed on the given data."""


class GraphError(HypotheticaError):
    """Invalid graph construction or query (cycle, unknown node, overlapping sets)."""


class BootstrapError(HypotheticaError):
    """Too many bootstrap resamples failed to yield a stable interval."""


class ConfigError(HypotheticaError):
    """A study/CLI configuration is invalid."""
