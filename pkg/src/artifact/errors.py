"""Exception types shared by all modules."""


class ArtifactError(Exception):
    """Base class for every error raised by the package."""


class InvalidArgument(ArtifactError, ValueError):
    pass


class ResourceLimit(ArtifactError):
    """An enumeration would exceed a configured bound."""


class PreconditionViolated(ArtifactError):
    pass


class IntegralityViolation(ArtifactError):
    """A Verlinde coefficient is not close to a non-negative integer."""

    def __init__(self, message, worst=None, residual=None):
        super().__init__(message)
        self.worst = worst
        self.residual = residual


class ConstructionImpossible(ArtifactError):
    pass


class AdmissibilityContradiction(ArtifactError):
    """A closed-form value came out non-integral on an input that passed validation."""


class InternalConsistency(ArtifactError):
    pass


class Rejected(ArtifactError):
    """Family input failed one or more admissibility conditions."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NotFound(ArtifactError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "not found"


class ParseError(ArtifactError, ValueError):
    pass
