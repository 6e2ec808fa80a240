"""Exception hierarchy.

Every error raised deliberately by the package derives from
:class:`BayesTrendsError`.  The two subfamilies map onto CLI exit codes:
``ValidationError`` (bad numbers, exit 2) and ``ConfigError`` (unreadable or
schema-violating inputs, exit 3).
"""


class BayesTrendsError(Exception):
    exit_code = 1


class ValidationError(BayesTrendsError, ValueError):
    exit_code = 2


class ConfigError(BayesTrendsError, ValueError):
    exit_code = 3


class DimensionMismatch(ValidationError):
    pass


class NotPositiveDefinite(ValidationError):
    pass


class BadPeriods(ValidationError):
    pass


class NegativeVariance(ValidationError):
    pass


class BadRho(ValidationError):
    pass


class BadLevel(ValidationError):
    pass


class SingularPrior(ValidationError):
    pass


class SingularPosteriorPrecision(ValidationError):
    pass


class SingularCovariance(ValidationError):
    pass


class TooFewPeriods(ValidationError):
    pass


class SingularOmega(ValidationError):
    pass


class EmptyGrid(ValidationError):
    pass


class AllWeightsUnderflow(ValidationError):
    pass


class DimensionTooLarge(ValidationError):
    pass


class GridTooCoarse(ValidationError):
    pass


class ReplicationFailed(BayesTrendsError):
    """A simulation replication raised; carries the replication index."""

    def __init__(self, index, cause):
        super().__init__(f"replication {index} failed: {type(cause).__name__}: {cause}")
        self.index = index
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)


class ParseError(ConfigError):
    pass


class SchemaError(ConfigError):
    pass
