"""
Comparison detectors. Meso4 is rebuilt from the MesoNet lineage (widths
8/8/16/16, pooling 2/2/2/4); the SPSL-style detector runs the same CNN over
RGB plus a phase-spectrum channel instead of an Xception backbone.
"""
import torch
from torch import nn

from modules.networks import MESO4_KERNEL_SIZES, MESO4_POOL_SIZES, Meso4Config
from networks.base import Detector, GenConViTOutput
from utils.nn_primitives import leaky_relu, relu
from utils.spectral import spsl_phase_features


class MesoBlock(nn.Module):
    def __init__(self, in_channels: int, out_channels: int, kernel_size: int, pool_size: int):
        super().__init__()
        self.conv = nn.Conv2d(in_channels, out_channels, kernel_size, padding="same")
        self.bn = nn.BatchNorm2d(out_channels)
        self.pool = nn.MaxPool2d(pool_size)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.pool(self.bn(relu(self.conv(x))))


class Meso4(Detector):
    name = "meso4"

    def __init__(self, cfg: Meso4Config):
        super().__init__(input_size=cfg.input_size, in_channels=cfg.in_channels)
        self.cfg = cfg
        channels = [cfg.in_channels, *cfg.widths]
        self.blocks = nn.Sequential(
            *(
                MesoBlock(c_in, c_out, kernel, pool)
                for c_in, c_out, kernel, pool in zip(
                    channels[:-1], channels[1:], MESO4_KERNEL_SIZES, MESO4_POOL_SIZES
                )
            )
        )
        self.dropout = nn.Dropout(cfg.dropout)
        self.fc1 = nn.Linear(cfg.flat_features, cfg.hidden)
        self.fc2 = nn.Linear(cfg.hidden, 2)

    def features(self, images: torch.Tensor) -> torch.Tensor:
        return self.blocks(images).flatten(1)

    def forward(self, images: torch.Tensor) -> GenConViTOutput:
        images = self.check_input(images)
        x = leaky_relu(self.fc1(self.dropout(self.features(images))), self.cfg.leaky_slope)
        return GenConViTOutput(logits=self.fc2(self.dropout(x)))


class SpslDetector(Meso4):
    """Meso4-style CNN over RGB + phase channel; takes plain RGB input."""

    name = "spsl"

    def __init__(self, cfg: Meso4Config):
        super().__init__(cfg.model_copy(update={"in_channels": 4}))
        self.in_channels = 3

    def forward(self, images: torch.Tensor) -> GenConViTOutput:
        images = self.check_input(images)
        augmented = spsl_phase_features(images)
        x = leaky_relu(self.fc1(self.dropout(self.features(augmented))), self.cfg.leaky_slope)
        return GenConViTOutput(logits=self.fc2(self.dropout(x)))
