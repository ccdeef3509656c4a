"""
Exception hierarchy for multi_elicit.

Every error raised on purpose by the toolkit derives from ElicitationError,
which is a ValueError so callers that only know about bad inputs still catch it.
The CLI turns any of these into exit code 2.
"""


class ElicitationError(ValueError):
    """Base class for all toolkit errors."""


class ArityError(ElicitationError):
    """An outcome tuple does not have the number of observations requested."""


class DistributionError(ElicitationError):
    """Probabilities are negative, do not sum to one, or do not fit the space."""


class DomainError(ElicitationError):
    """A distribution lies outside the declared domain of a property or loss."""


class NonUniqueMinimizerError(ElicitationError):
    """The expected loss is flat across the report box."""


class ReportBoxError(ElicitationError):
    """The expected loss still decreases past an edge of the report box."""


class MissingIdentificationError(ElicitationError):
    """The loss carries no identification function."""


class UnknownNameError(ElicitationError, KeyError):
    """A catalog name is not registered."""

    def __str__(self) -> str:
        return ValueError.__str__(self)


class ValueNotAttainedError(ElicitationError):
    """A level value is not attained on the scanned family."""


class DegenerateSampleError(ElicitationError):
    """A level-set sample is empty or both samples target the same value."""


class InvalidWitnessError(ElicitationError):
    """Witness weights are negative or do not sum to one."""


class SiteConstructionError(ElicitationError):
    """Voronoi sites cannot be built for the requested bands."""


class RankError(ElicitationError):
    """The regression design matrix is rank deficient."""


class PlanError(ElicitationError):
    """A central-moment plan was requested with an invalid block count."""


class ConfigurationError(ElicitationError):
    """A run is missing a required option or combines incompatible ones."""
