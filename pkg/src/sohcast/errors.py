"""Exception taxonomy shared across the package."""


class SohcastError(Exception):
    """Base class for all package errors."""


class ConfigError(SohcastError):
    """Invalid configuration value or malformed config document."""


class DataError(SohcastError):
    """Malformed or out-of-range input data."""


class InputError(SohcastError):
    """A runtime input (e.g. forecast window) violates a shape contract."""


class UsageError(SohcastError):
    """API misuse, e.g. backward before any forward was recorded."""


class TrainingInstabilityError(SohcastError):
    """Non-finite values produced during training or integration."""


class EvaluationError(SohcastError):
    """A model that cannot be evaluated (e.g. a failed training run)."""


class EmissionError(SohcastError):
    """Embedded source emission hit an unsupported construct."""


class CheckpointError(SohcastError):
    """Corrupt or incompatible checkpoint container."""


class PipelineError(SohcastError):
    """A pipeline stage could not produce a usable result."""
