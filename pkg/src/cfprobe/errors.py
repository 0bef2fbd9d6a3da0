"""Exception types shared across the toolkit."""


class ConfigurationError(ValueError):
    """Invalid probe configuration (empty inventories, duplicate labels, bad records)."""


class DegenerateVectorError(ValueError):
    """A vector operation received a zero or effectively-zero input."""


class DimensionMismatchError(ValueError):
    """Vectors of different dimensionality were combined."""


class IngestError(ValueError):
    """An embedding or metadata file failed validation; the message names the offending record."""


class StageError(RuntimeError):
    """A pipeline stage could not run; the message names the stage."""
