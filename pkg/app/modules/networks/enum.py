from enum import Enum


class BackboneKindEnum(str, Enum):
    CONVNEXT_LIKE = "convnext_like"
    SWIN_LIKE = "swin_like"


class ScalePresetEnum(str, Enum):
    PAPER_TINY = "paper_tiny"
    DESK = "desk"


class CombineModeEnum(str, Enum):
    AVG = "avg"
    MAX = "max"
    A_ONLY = "a_only"
    B_ONLY = "b_only"


class ReconLossEnum(str, Enum):
    MSE = "mse"
    LOG_LIKELIHOOD = "log_likelihood"
