from modules.networks import ScalePresetEnum

from .baselines import Meso4, SpslDetector
from .base import Detector, GenConViTOutput
from .genconvit import GenConViT, GenConViTA, GenConViTB
from .presets import genconvit_config, meso4_config
from .registry import DetectorHandle, DetectorRegistry, reserved

DETECTOR_REGISTRY = DetectorRegistry()


@DETECTOR_REGISTRY.register("genconvit_ae", description="GenConViT Network A (autoencoder)")
def build_genconvit_ae(preset: ScalePresetEnum) -> Detector:
    return GenConViTA(genconvit_config(preset))


@DETECTOR_REGISTRY.register("genconvit_vae", description="GenConViT Network B (VAE)")
def build_genconvit_vae(preset: ScalePresetEnum) -> Detector:
    return GenConViTB(genconvit_config(preset))


@DETECTOR_REGISTRY.register("genconvit", description="GenConViT, both networks combined")
def build_genconvit(preset: ScalePresetEnum) -> Detector:
    return GenConViT(genconvit_config(preset))


@DETECTOR_REGISTRY.register("meso4", description="Meso4 mesoscopic CNN")
def build_meso4(preset: ScalePresetEnum) -> Detector:
    return Meso4(meso4_config(preset))


@DETECTOR_REGISTRY.register("spsl", description="Meso4-style CNN over RGB + phase spectrum")
def build_spsl(preset: ScalePresetEnum) -> Detector:
    return SpslDetector(meso4_config(preset))


for _name in ("xception", "efficientnet_b4", "ucf"):
    DETECTOR_REGISTRY.register(
        _name, reserved(_name), bundled=False, description="external plug-in point"
    )

__all__ = [
    "DETECTOR_REGISTRY",
    "Detector",
    "DetectorHandle",
    "DetectorRegistry",
    "GenConViT",
    "GenConViTA",
    "GenConViTB",
    "GenConViTOutput",
    "Meso4",
    "SpslDetector",
    "genconvit_config",
    "meso4_config",
]
