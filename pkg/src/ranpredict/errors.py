"""Exception types shared across the toolkit.

The CLI maps these onto distinct exit codes, so raising the right class
matters more than the message wording.
"""


class RanpredictError(Exception):
    """Base class for all toolkit-specific errors."""


class ConfigError(RanpredictError):
    """Invalid configuration value, task definition, or flag combination."""


class CsvSchemaError(RanpredictError):
    """Input CSV header is missing required columns or is unusable."""


class ModelDecodeError(RanpredictError):
    """Serialized model or scaler payload is malformed, truncated, or has an
    unknown format/version tag."""


class UnsupportedModelError(RanpredictError):
    """Operation requested on a model kind that cannot support it."""
