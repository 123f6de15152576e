"""Exception types shared across the pipeline.

Everything raised on a validation/contract failure derives from
PipelineError so the CLI can map it to exit code 1; plain OSError is left
alone and maps to exit code 2.
"""


class PipelineError(Exception):
    """Base class for contract and validation failures."""


class EmptyCorpusError(PipelineError):
    """No valid records survived ingestion."""


class EmptyPlanError(PipelineError):
    """No city is present in every reference month."""


class ConfigurationError(PipelineError):
    """Invalid or inconsistent configuration values."""


class TagsetViolationError(PipelineError):
    """A tagger emitted a label outside the closed tagset."""


class UndefinedAssociationError(PipelineError):
    """Delta-P requested for a contingency table with a zero margin."""


class TrainingError(PipelineError):
    """Classifier training preconditions not met."""


class DimensionMismatchError(PipelineError):
    """Feature vector shape does not match the model."""


class EvaluationError(PipelineError):
    """Evaluation inputs empty or inconsistent."""


class InsufficientDataError(PipelineError):
    """A statistical fit was requested on too short a series."""


class DegenerateFieldError(PipelineError):
    """Spatial field has no trials to analyze."""


class UnknownCityError(PipelineError):
    """A prediction references a city absent from the spatial field."""


class UndefinedStatisticError(PipelineError):
    """Moran's I requested on a zero-variance field."""
