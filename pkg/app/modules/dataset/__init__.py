from .dto import (
    AugmentationConfig,
    DatasetStats,
    ManifestEntry,
    ManifestHeader,
    SplitSpec,
    ORIGINAL_METHOD,
)
from .enum import FrameSamplingEnum, LabelEnum, SplitEnum, TransformEnum

__all__ = [
    "AugmentationConfig",
    "DatasetStats",
    "ManifestEntry",
    "ManifestHeader",
    "SplitSpec",
    "ORIGINAL_METHOD",
    "FrameSamplingEnum",
    "LabelEnum",
    "SplitEnum",
    "TransformEnum",
]
