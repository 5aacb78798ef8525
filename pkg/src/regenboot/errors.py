"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes, so harness code raises the specific
subclass rather than a bare ValueError whenever the failure is one a caller
may want to dispatch on.
"""


class RegenbootError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(RegenbootError):
    """Experiment configuration is missing, malformed, or inconsistent."""


class DegenerateSampleError(RegenbootError):
    """All excursion blocks carry the same observable sum (zero variance).

    The normalized bootstrap statistic is undefined in this case; it is a
    first-class error rather than a silent zero.
    """


class InsufficientReturnsError(RegenbootError):
    """The trajectory contains fewer returns of the initial string than requested."""

    def __init__(self, found: int, requested: int):
        self.found = found
        self.requested = requested
        super().__init__(
            f"found {found} returns of the initial string, {requested} requested; "
            f"extend the trajectory"
        )


class ResourceCapError(RegenbootError):
    """A configured size cap (trajectory length, context table, schedule) was exceeded."""


class StationarityError(RegenbootError):
    """Power iteration failed to reach the requested fixed-point tolerance."""
