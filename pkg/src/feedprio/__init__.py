"""Feedback-driven requirements prioritization and dependency-aware release planning."""

from .errors import (
    ConfigurationError,
    DataError,
    ExternalServiceError,
    FeedprioError,
    IntegrityError,
    ParseError,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "DataError",
    "ExternalServiceError",
    "FeedprioError",
    "IntegrityError",
    "ParseError",
    "__version__",
]
