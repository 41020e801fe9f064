"""
GenConViT: Network A (autoencoder) and Network B (variational autoencoder),
each followed by the ConvNeXt-like / Swin-like hybrid on the original image and
on its reconstruction.
"""
import torch
import torch.nn.functional as F
from torch import nn

from modules.networks import CombineModeEnum, GenConViTConfig, LossPlan, ReconLossEnum
from networks.autoencoders import AutoEncoder, VariationalAutoEncoder, reparameterize
from networks.backbones import HybridTransformer
from networks.base import Detector, GenConViTOutput
from shared.exceptions import ShapeMismatchError
from utils.nn_primitives import (
    LossValue,
    cross_entropy_loss,
    gelu,
    kl_diag_gaussian,
    log_likelihood_recon,
    mse_loss,
    relu,
    softmax_fake_probability,
    vae_total_loss,
)


class MissingReconstructionError(ShapeMismatchError):
    pass


def downsample_target(images: torch.Tensor, size: int) -> torch.Tensor:
    """Bilinear resize of the input batch to the reconstruction size."""
    if images.shape[-1] == size and images.shape[-2] == size:
        return images
    return F.interpolate(images, size=(size, size), mode="bilinear", align_corners=False)


def network_losses(
    output: GenConViTOutput,
    labels: torch.Tensor,
    target_image: torch.Tensor,
    plan: LossPlan,
    with_reconstruction: bool,
) -> LossValue:
    """
    Cross entropy for Network A; cross entropy plus reconstruction (and an
    optional KL term) for Network B
    :param output: network output
    :param labels: 0 real, 1 fake, shape (B,)
    :param target_image: the input batch, downsampled here to the reconstruction size
    :param plan: loss weights
    :param with_reconstruction: True for Network B
    :return: composite loss with named components
    """
    probs = softmax_fake_probability(output.logits)
    ce = cross_entropy_loss(labels.to(probs.dtype), probs).total
    components = {"ce": ce}
    total = plan.ce_weight * ce
    if with_reconstruction:
        if output.reconstruction is None:
            raise MissingReconstructionError("Network B loss needs the reconstruction")
        target = downsample_target(target_image, output.reconstruction.shape[-1])
        if plan.recon_loss == ReconLossEnum.LOG_LIKELIHOOD:
            recon = log_likelihood_recon(target, output.reconstruction)
        else:
            recon = mse_loss(target, output.reconstruction)
        components[plan.recon_loss.value] = recon.total
        weighted_recon = LossValue(total=plan.recon_weight * recon.total)
        if plan.kl_weight > 0:
            if output.latent_mu is None or output.latent_logvar is None:
                raise MissingReconstructionError("KL term needs mu and logvar")
            kl = kl_diag_gaussian(output.latent_mu, output.latent_logvar)
            components["kl"] = kl.total
            total = total + vae_total_loss(weighted_recon, kl, beta=plan.kl_weight).total
        else:
            total = total + weighted_recon.total
    return LossValue(total=total, components=components)


def combined_predict(
    out_a: GenConViTOutput,
    out_b: GenConViTOutput,
    mode: CombineModeEnum = CombineModeEnum.AVG,
) -> torch.Tensor:
    """
    Combines the fake probabilities of both networks
    :return: score per sample in [0, 1]
    """
    p_a = softmax_fake_probability(out_a.logits)
    p_b = softmax_fake_probability(out_b.logits)
    mode = CombineModeEnum(mode)
    if mode == CombineModeEnum.A_ONLY:
        return p_a
    if mode == CombineModeEnum.B_ONLY:
        return p_b
    if mode == CombineModeEnum.MAX:
        return torch.maximum(p_a, p_b)
    return (p_a + p_b) / 2.0


class GenConViTA(Detector):
    name = "genconvit_ae"

    def __init__(self, cfg: GenConViTConfig):
        super().__init__(input_size=cfg.input_size, in_channels=cfg.ae.input_channels)
        self.cfg = cfg
        self.ae = AutoEncoder(cfg.ae)
        self.hybrid = HybridTransformer(cfg.convnext, cfg.swin, cfg.ae.input_channels)
        self.fc1 = nn.Linear(2 * cfg.embed_dim, cfg.head_hidden)
        self.fc2 = nn.Linear(cfg.head_hidden, 2)

    def forward(
        self,
        images: torch.Tensor,
        return_reconstruction: bool = False,
        ablate_reconstruction: bool = False,
    ) -> GenConViTOutput:
        images = self.check_input(images)
        reconstruction = self.ae(images)
        features = self.hybrid(images)
        recon_features = self.hybrid(reconstruction)
        if ablate_reconstruction:
            recon_features = torch.zeros_like(recon_features)
        x = gelu(self.fc1(torch.cat([features, recon_features], dim=1)))
        return GenConViTOutput(
            logits=self.fc2(x),
            reconstruction=reconstruction if return_reconstruction else None,
        )

    def losses(self, output, labels, images) -> LossValue:
        return network_losses(output, labels, images, self.cfg.loss, with_reconstruction=False)


class GenConViTB(Detector):
    name = "genconvit_vae"

    def __init__(self, cfg: GenConViTConfig):
        super().__init__(input_size=cfg.vae.input_size, in_channels=cfg.vae.input_channels)
        self.cfg = cfg
        self.vae = VariationalAutoEncoder(cfg.vae)
        self.hybrid = HybridTransformer(cfg.convnext, cfg.swin, cfg.vae.input_channels)
        self.fc1 = nn.Linear(2 * cfg.embed_dim, cfg.head_hidden)
        self.fc2 = nn.Linear(cfg.head_hidden, 2)

    def forward(self, images: torch.Tensor, noise: torch.Tensor | None = None) -> GenConViTOutput:
        """
        :param images: (B, 3, S, S)
        :param noise: N(0, I) sample shaped like mu; drawn in training mode and
            zero in eval mode when omitted
        """
        images = self.check_input(images)
        mu, logvar = self.vae.encode(images)
        if noise is None:
            noise = torch.randn_like(mu) if self.training else torch.zeros_like(mu)
        z = reparameterize(mu, logvar, noise)
        reconstruction = self.vae.decode(z)
        features = self.hybrid(images)
        recon_features = self.hybrid(reconstruction)
        x = relu(self.fc1(torch.cat([features, recon_features], dim=1)))
        return GenConViTOutput(
            logits=self.fc2(x),
            reconstruction=reconstruction,
            latent_mu=mu,
            latent_logvar=logvar,
        )

    def losses(self, output, labels, images) -> LossValue:
        return network_losses(output, labels, images, self.cfg.loss, with_reconstruction=True)


class GenConViT(Detector):
    """Both networks, scored together with ``combined_predict``."""

    name = "genconvit"

    def __init__(self, cfg: GenConViTConfig):
        super().__init__(input_size=cfg.input_size, in_channels=cfg.ae.input_channels)
        self.cfg = cfg
        self.network_a = GenConViTA(cfg)
        self.network_b = GenConViTB(cfg)

    def forward(self, images: torch.Tensor) -> GenConViTOutput:
        out_a = self.network_a(images)
        out_b = self.network_b(images)
        p = combined_predict(out_a, out_b, self.cfg.combine_mode)
        logits = torch.stack([torch.log1p(-p.clamp(max=1 - 1e-7)), torch.log(p.clamp(min=1e-7))], dim=1)
        return GenConViTOutput(logits=logits, parts=(out_a, out_b))

    def score(self, output: GenConViTOutput) -> torch.Tensor:
        if output.parts is None:
            return super().score(output)
        return combined_predict(*output.parts, mode=self.cfg.combine_mode)

    def losses(self, output, labels, images) -> LossValue:
        out_a, out_b = output.parts
        loss_a = self.network_a.losses(out_a, labels, images)
        loss_b = self.network_b.losses(out_b, labels, images)
        components = {f"a_{k}": v for k, v in loss_a.components.items()}
        components.update({f"b_{k}": v for k, v in loss_b.components.items()})
        return LossValue(total=loss_a.total + loss_b.total, components=components)
