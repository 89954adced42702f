"""Exception types shared across the package."""


class InvalidEmbeddingError(ValueError):
    """An embedding row is unusable (zero vector, NaN, or Inf)."""


class DegeneratePlanError(ValueError):
    """A sampling plan cannot reach the requested confidence."""


class GenerationInfeasibleError(RuntimeError):
    """The synthetic generator cannot satisfy the requested bounds."""


class UndefinedAucError(ValueError):
    """ROC-AUC is undefined because the labels contain a single class."""


class FileFormatError(ValueError):
    """A file does not conform to its declared format."""
