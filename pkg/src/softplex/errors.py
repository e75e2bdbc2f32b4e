"""Exception hierarchy for softplex."""


class SoftplexError(Exception):
    """Base class for all softplex errors."""


class ConfigurationError(SoftplexError):
    """A configuration value is missing, malformed, or unsupported."""


class InputError(SoftplexError, ValueError):
    """An argument violates a precondition (dimension mismatch, empty set, ...)."""


class DegenerateSampleError(SoftplexError):
    """A sample is statistically degenerate (e.g. zero empirical variance)."""


class MemoryGuardError(SoftplexError):
    """Predicted instance size exceeds the configured cap; run refused."""
