from .dto import (
    CHECKPOINT_FORMAT_VERSION,
    Checkpoint,
    EpochEvaluation,
    EpochLogRecord,
    TrainConfig,
)

__all__ = [
    "CHECKPOINT_FORMAT_VERSION",
    "Checkpoint",
    "EpochEvaluation",
    "EpochLogRecord",
    "TrainConfig",
]
