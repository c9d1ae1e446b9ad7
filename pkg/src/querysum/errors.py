"""Exception hierarchy shared across the package."""


class QuerysumError(Exception):
    """Base class for all package errors."""


class ConfigError(QuerysumError, ValueError):
    """Invalid layer/model/CLI configuration value."""


class DimensionError(QuerysumError, ValueError):
    """Shape mismatch between tensors."""


class InputError(QuerysumError, ValueError):
    """Invalid input data (bad indices, too-short video, ...)."""


class GraphIntegrityError(QuerysumError, ValueError):
    """Edge list references a vertex that does not exist."""


class VocabularyError(QuerysumError, KeyError):
    """Concept not present in the embedding table."""


class DataFormatError(QuerysumError, ValueError):
    """Corrupt or inconsistent on-disk artifact."""


class DegenerateGraphError(QuerysumError, ValueError):
    """Graph has no positive edge weight."""


class ConvergenceError(QuerysumError, RuntimeError):
    """Iterative solver hit its iteration limit."""


class GradCheckError(QuerysumError, RuntimeError):
    """Finite-difference check produced a non-finite value."""
