"""Exception types shared across the pipeline."""


class PipelineError(Exception):
    """Base class for all gsdetect errors."""


class MalformedDomain(PipelineError):
    pass


class UnknownSuffix(PipelineError):
    pass


class DimensionMismatch(PipelineError):
    pass


class AdapterUnavailable(PipelineError):
    pass


class MissingEmbedding(PipelineError):
    pass


class EmptyInput(PipelineError):
    pass


class EmptyReferenceSet(PipelineError):
    pass


class MalformedRecord(PipelineError):
    pass


class UnsortedInput(PipelineError):
    pass


class MissingFirstSeen(PipelineError):
    pass


class DegenerateLabels(PipelineError):
    pass


class SetTooSmall(PipelineError):
    pass


class ImpossibleTemplate(PipelineError):
    pass


class ConfigError(PipelineError):
    pass
