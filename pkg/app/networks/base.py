from collections.abc import Mapping
from dataclasses import dataclass

import torch
from torch import nn

from shared.exceptions import ShapeMismatchError
from utils.nn_primitives import LossValue, cross_entropy_loss, softmax_fake_probability


@dataclass
class GenConViTOutput:
    """
    Per-batch detector output.

    Attributes:
        logits (torch.Tensor): (B, 2), column 1 is the fake class.
        reconstruction (torch.Tensor | None): decoder output when requested.
        latent_mu (torch.Tensor | None): (B, latent_dim) for Network B.
        latent_logvar (torch.Tensor | None): (B, latent_dim) for Network B.
        parts (tuple | None): per-network outputs of a combined detector.
    """

    logits: torch.Tensor
    reconstruction: torch.Tensor | None = None
    latent_mu: torch.Tensor | None = None
    latent_logvar: torch.Tensor | None = None
    parts: tuple["GenConViTOutput", "GenConViTOutput"] | None = None


class Detector(nn.Module):
    """Common contract of every registered detector."""

    name: str = "detector"

    def __init__(self, input_size: int, in_channels: int = 3):
        super().__init__()
        self.input_size = input_size
        self.in_channels = in_channels

    def check_input(self, images: torch.Tensor) -> torch.Tensor:
        if images.ndim == 3:
            images = images.unsqueeze(0)
        expected = (self.in_channels, self.input_size, self.input_size)
        if images.ndim != 4 or tuple(images.shape[1:]) != expected:
            raise ShapeMismatchError(
                f"{self.name}: expected images (B, {expected[0]}, {expected[1]}, {expected[2]}), "
                f"got {tuple(images.shape)}"
            )
        return images

    def forward(self, images: torch.Tensor) -> GenConViTOutput:
        raise NotImplementedError

    def score(self, output: GenConViTOutput) -> torch.Tensor:
        """Fake probability per sample."""
        return softmax_fake_probability(output.logits)

    def losses(
        self, output: GenConViTOutput, labels: torch.Tensor, images: torch.Tensor
    ) -> LossValue:
        return cross_entropy_loss(labels.to(output.logits.dtype), self.score(output))

    @torch.no_grad()
    def predict_proba(self, images: torch.Tensor) -> torch.Tensor:
        return self.score(self(images))

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters() if p.requires_grad)

    def config_echo(self) -> dict:
        cfg = getattr(self, "cfg", None)
        return cfg.model_dump(mode="json") if cfg is not None else {}

    def load_external_weights(
        self, weights: Mapping[str, torch.Tensor], prefix: str = ""
    ) -> list[str]:
        """
        Copies externally trained weights into the layers named by their keys
        :param weights: layer name -> tensor, e.g. a pretrained backbone state
        :param prefix: prepended to every key, e.g. "network_a.hybrid."
        :return: names of the loaded tensors
        """
        own = self.state_dict()
        loaded = []
        for key, value in weights.items():
            target = prefix + key
            if target not in own:
                raise KeyError(f"no layer named {target!r}")
            if own[target].shape != value.shape:
                raise ShapeMismatchError(
                    f"{target}: expected {tuple(own[target].shape)}, got {tuple(value.shape)}"
                )
            own[target].copy_(value)
            loaded.append(target)
        return loaded
