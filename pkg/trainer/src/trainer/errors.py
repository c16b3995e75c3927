"""Exception types shared across the trainer."""


class TrainerError(Exception):
    """Base class for all trainer errors."""


class InsufficientData(TrainerError):
    pass


class TrainingDiverged(TrainerError):
    pass


class ModelLoadFailure(TrainerError):
    pass
