from .dto import (
    AEConfig,
    VAEConfig,
    BackboneConfig,
    LossPlan,
    GenConViTConfig,
    Meso4Config,
    MESO4_KERNEL_SIZES,
    MESO4_POOL_SIZES,
)
from .enum import BackboneKindEnum, CombineModeEnum, ReconLossEnum, ScalePresetEnum

__all__ = [
    "AEConfig",
    "VAEConfig",
    "BackboneConfig",
    "LossPlan",
    "GenConViTConfig",
    "Meso4Config",
    "MESO4_KERNEL_SIZES",
    "MESO4_POOL_SIZES",
    "BackboneKindEnum",
    "CombineModeEnum",
    "ReconLossEnum",
    "ScalePresetEnum",
]
