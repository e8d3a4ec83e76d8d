"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: configuration problems (1), data
problems (2), external-service problems (3).
"""


class FeedprioError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(FeedprioError):
    """Invalid or incomplete configuration (bad knob, missing path, unknown variant)."""


class DataError(FeedprioError):
    """Input data violates a documented contract."""


class ParseError(DataError):
    """A file or response could not be parsed; the message names the offending row."""


class IntegrityError(DataError):
    """Cross-record consistency violation (duplicate ids, orphan references)."""


class ExternalServiceError(FeedprioError):
    """A remote endpoint failed or is unreachable."""
