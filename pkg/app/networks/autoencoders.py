import torch
from torch import nn

from modules.networks import AEConfig, VAEConfig
from shared.exceptions import ShapeMismatchError
from utils.nn_primitives import leaky_relu, relu, sigmoid


def _as_batch(x: torch.Tensor, rank: int) -> tuple[torch.Tensor, bool]:
    if x.ndim == rank:
        return x.unsqueeze(0), True
    return x, False


def _check_image(x: torch.Tensor, channels: int, size: int, what: str) -> None:
    if x.ndim != 4 or tuple(x.shape[1:]) != (channels, size, size):
        raise ShapeMismatchError(
            f"{what}: expected (B, {channels}, {size}, {size}), got {tuple(x.shape)}"
        )


def reparameterize(mu: torch.Tensor, logvar: torch.Tensor, noise: torch.Tensor) -> torch.Tensor:
    """z = mu + exp(logvar / 2) * noise"""
    if not mu.shape == logvar.shape == noise.shape:
        raise ShapeMismatchError(
            f"reparameterize: mu {tuple(mu.shape)}, logvar {tuple(logvar.shape)}, "
            f"noise {tuple(noise.shape)} differ"
        )
    return mu + torch.exp(0.5 * logvar) * noise


class AutoEncoder(nn.Module):
    """Five stride-2 convolutions down, five transposed convolutions up."""

    def __init__(self, cfg: AEConfig):
        super().__init__()
        self.cfg = cfg
        channels = [cfg.input_channels, *cfg.encoder_channels]
        self.encoder = nn.ModuleList(
            nn.Conv2d(c_in, c_out, cfg.kernel_size, stride=2, padding=cfg.kernel_size // 2)
            for c_in, c_out in zip(channels[:-1], channels[1:])
        )
        reversed_channels = channels[::-1]
        self.decoder = nn.ModuleList(
            nn.ConvTranspose2d(c_in, c_out, kernel_size=2, stride=2)
            for c_in, c_out in zip(reversed_channels[:-1], reversed_channels[1:])
        )

    def encode(self, image: torch.Tensor) -> torch.Tensor:
        image, unbatched = _as_batch(image, 3)
        _check_image(image, self.cfg.input_channels, self.cfg.input_size, "ae_encode")
        x = image
        for conv in self.encoder:
            x = relu(conv(x))
        return x[0] if unbatched else x

    def decode(self, latent: torch.Tensor) -> torch.Tensor:
        latent, unbatched = _as_batch(latent, 3)
        if tuple(latent.shape[1:]) != self.cfg.latent_shape:
            raise ShapeMismatchError(
                f"ae_decode: expected latent {self.cfg.latent_shape}, got {tuple(latent.shape[1:])}"
            )
        x = latent
        for index, deconv in enumerate(self.decoder):
            x = deconv(x)
            x = sigmoid(x) if index == len(self.decoder) - 1 else relu(x)
        return x[0] if unbatched else x

    def forward(self, image: torch.Tensor) -> torch.Tensor:
        return self.decode(self.encode(image))


class VariationalAutoEncoder(nn.Module):
    """
    Four conv + batch-norm + LeakyReLU stages. mu and logvar come from 1x1
    convolutions over the last feature map, flattened to ``latent_dim``.
    The decoder returns the mean of p(x'|z).
    """

    def __init__(self, cfg: VAEConfig):
        super().__init__()
        self.cfg = cfg
        channels = [cfg.input_channels, *cfg.encoder_channels]
        self.encoder = nn.ModuleList(
            nn.Sequential(
                nn.Conv2d(c_in, c_out, kernel_size=3, stride=2, padding=1),
                nn.BatchNorm2d(c_out),
            )
            for c_in, c_out in zip(channels[:-1], channels[1:])
        )
        latent_channels = cfg.encoder_channels[-1]
        self.to_mu = nn.Conv2d(latent_channels, latent_channels, kernel_size=1)
        self.to_logvar = nn.Conv2d(latent_channels, latent_channels, kernel_size=1)

        widths = [latent_channels] + [
            max(latent_channels // 2 ** (i + 1), 8) for i in range(cfg.decoder_stages)
        ]
        self.decoder = nn.ModuleList(
            nn.ConvTranspose2d(c_in, c_out, kernel_size=2, stride=2)
            for c_in, c_out in zip(widths[:-1], widths[1:])
        )
        self.decoder_head = nn.Conv2d(widths[-1], cfg.input_channels, kernel_size=1)

    def encode(self, image: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        image, unbatched = _as_batch(image, 3)
        _check_image(image, self.cfg.input_channels, self.cfg.input_size, "vae_encode")
        x = image
        for stage in self.encoder:
            x = leaky_relu(stage(x), self.cfg.leaky_slope)
        mu = self.to_mu(x).flatten(1)
        logvar = self.to_logvar(x).flatten(1)
        if unbatched:
            return mu[0], logvar[0]
        return mu, logvar

    def decode(self, z: torch.Tensor) -> torch.Tensor:
        z, unbatched = _as_batch(z, 1)
        if z.ndim != 2 or z.shape[1] != self.cfg.latent_dim:
            raise ShapeMismatchError(
                f"vae_decode: expected latent length {self.cfg.latent_dim}, got {tuple(z.shape)}"
            )
        x = z.view(z.shape[0], *self.cfg.latent_grid)
        for deconv in self.decoder:
            x = relu(deconv(x))
        x = sigmoid(self.decoder_head(x))
        return x[0] if unbatched else x
