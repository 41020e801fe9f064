"""
Reference activations, losses and convolution used by every network in the
package, plus a central-difference gradient checker.

Reference paths run in float64; the same functions accept float32 tensors
from the training loop.
"""
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import torch

from shared.exceptions import EmptyInputError, NonFiniteValueError, ShapeMismatchError

PROB_EPS = 1e-7


@dataclass
class LossValue:
    """
    Scalar loss with its named parts.

    Attributes:
        total (torch.Tensor): 0-dim tensor, keeps the autograd graph.
        components (dict[str, torch.Tensor]): named 0-dim parts of ``total``.
    """

    total: torch.Tensor
    components: dict[str, torch.Tensor] = field(default_factory=dict)

    @property
    def value(self) -> float:
        return float(self.total.detach())

    def component_values(self) -> dict[str, float]:
        return {name: float(part.detach()) for name, part in self.components.items()}


def _check_same_shape(a: torch.Tensor, b: torch.Tensor, what: str) -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(
            f"{what}: shapes {tuple(a.shape)} and {tuple(b.shape)} differ"
        )


def sigmoid(x: torch.Tensor) -> torch.Tensor:
    return torch.sigmoid(x)


def relu(x: torch.Tensor) -> torch.Tensor:
    return torch.clamp_min(x, 0.0)


def gelu(x: torch.Tensor) -> torch.Tensor:
    # exact erf form
    return x * 0.5 * (1.0 + torch.erf(x / math.sqrt(2.0)))


def leaky_relu(x: torch.Tensor, slope: float) -> torch.Tensor:
    if not 0.0 < slope < 1.0:
        raise ValueError(f"slope must lie in (0, 1), got {slope}")
    return torch.where(x >= 0, x, slope * x)


def softmax_fake_probability(logits: torch.Tensor) -> torch.Tensor:
    """
    :param logits: tensor of shape (B, 2), column 1 is the fake class
    :return: fake probability per row
    """
    if logits.ndim != 2 or logits.shape[-1] != 2:
        raise ShapeMismatchError(f"expected (B, 2) logits, got {tuple(logits.shape)}")
    return torch.softmax(logits, dim=-1)[:, 1]


def mse_loss(x: torch.Tensor, x_hat: torch.Tensor) -> LossValue:
    _check_same_shape(x, x_hat, "mse_loss")
    total = ((x - x_hat) ** 2).mean()
    return LossValue(total=total, components={"mse": total})


def cross_entropy_loss(labels: torch.Tensor, probs: torch.Tensor) -> LossValue:
    """
    Binary cross entropy with the 0*log(0) = 0 convention.

    Each log argument is kept at least PROB_EPS away from zero, which is the
    same as clamping probs into [eps, 1 - eps] wherever the weight of the log
    term is non-zero.
    """
    _check_same_shape(labels, probs, "cross_entropy_loss")
    labels = labels.to(probs.dtype)
    terms = torch.xlogy(labels, probs.clamp_min(PROB_EPS)) + torch.xlogy(
        1.0 - labels, (1.0 - probs).clamp_min(PROB_EPS)
    )
    total = -terms.mean()
    return LossValue(total=total, components={"ce": total})


def log_likelihood_recon(x: torch.Tensor, x_hat: torch.Tensor) -> LossValue:
    """Bernoulli negative log-likelihood of ``x`` under decoder means ``x_hat``."""
    _check_same_shape(x, x_hat, "log_likelihood_recon")
    value = cross_entropy_loss(x, x_hat).total
    return LossValue(total=value, components={"nll": value})


def kl_diag_gaussian(mu: torch.Tensor, logvar: torch.Tensor) -> LossValue:
    """
    KL(N(mu, exp(logvar)) || N(0, I)), summed over the last axis and averaged
    over the batch. A 1-d input is a single sample.
    """
    _check_same_shape(mu, logvar, "kl_diag_gaussian")
    per_sample = -0.5 * torch.sum(1.0 + logvar - mu**2 - torch.exp(logvar), dim=-1)
    total = per_sample.mean()
    return LossValue(total=total, components={"kl": total})


def vae_total_loss(recon: LossValue, kl: LossValue, beta: float = 1.0) -> LossValue:
    if not beta > 0:
        raise ValueError(f"KL weight beta must be positive, got {beta}")
    total = recon.total + beta * kl.total
    return LossValue(
        total=total,
        components={"recon": recon.total, "kl": kl.total, "weighted_kl": beta * kl.total},
    )


def adversarial_losses(
    d_real: torch.Tensor, d_fake: torch.Tensor
) -> tuple[LossValue, LossValue]:
    """
    Objective values (to be maximised) of the discriminator and the generator.
    :return: (mean[log D(x) + log(1 - D(G(z)))], mean[log(1 - D(G(z)))])
    """
    real = d_real.clamp(PROB_EPS, 1.0 - PROB_EPS)
    fake = d_fake.clamp(PROB_EPS, 1.0 - PROB_EPS)
    log_real = torch.log(real).mean()
    log_not_fake = torch.log(1.0 - fake).mean()
    discriminator = log_real + log_not_fake
    return (
        LossValue(
            total=discriminator,
            components={"log_d_real": log_real, "log_one_minus_d_fake": log_not_fake},
        ),
        LossValue(total=log_not_fake, components={"log_one_minus_d_fake": log_not_fake}),
    )


def conv1d_reference(f: torch.Tensor, g: torch.Tensor) -> torch.Tensor:
    """
    Full discrete convolution h(k) = sum_i f(i) g(k - i).

    Partial products are added to h in increasing i, the order of the naive
    double loop, so the result matches it bit for bit.
    """
    if f.ndim != 1 or g.ndim != 1:
        raise ShapeMismatchError("conv1d_reference expects rank-1 tensors")
    if f.numel() == 0 or g.numel() == 0:
        raise EmptyInputError("conv1d_reference expects non-empty inputs")
    dtype = torch.promote_types(f.dtype, g.dtype)
    h = torch.zeros(f.numel() + g.numel() - 1, dtype=dtype)
    g = g.to(dtype)
    for i, value in enumerate(f.to(dtype)):
        h[i : i + g.numel()] += value * g
    return h


def grad_check(
    fn: Callable[[torch.Tensor], torch.Tensor],
    x: torch.Tensor,
    eps: float = 1e-5,
    floor: float = 1e-6,
) -> float:
    """
    Compares the autograd gradient of a scalar function with central
    differences.
    :param fn: scalar-valued function of ``x``
    :param x: evaluation point, promoted to float64
    :param eps: finite-difference step
    :param floor: lower bound of the relative-error denominator
    :return: max over components of |a - n| / max(|a|, |n|, floor)
    """
    point = x.detach().to(torch.float64).clone().requires_grad_(True)
    value = fn(point)
    if not torch.isfinite(value).all():
        raise NonFiniteValueError("grad_check: function is not finite at x")
    (analytic,) = torch.autograd.grad(value, point)
    analytic = analytic.reshape(-1)

    flat = point.detach().reshape(-1)
    worst = 0.0
    with torch.no_grad():
        for index in range(flat.numel()):
            plus = flat.clone()
            minus = flat.clone()
            plus[index] += eps
            minus[index] -= eps
            f_plus = fn(plus.reshape(point.shape))
            f_minus = fn(minus.reshape(point.shape))
            if not (torch.isfinite(f_plus) and torch.isfinite(f_minus)):
                raise NonFiniteValueError(f"grad_check: non-finite value at component {index}")
            numeric = float(f_plus - f_minus) / (2.0 * eps)
            exact = float(analytic[index])
            error = abs(exact - numeric) / max(abs(exact), abs(numeric), floor)
            worst = max(worst, error)
    return worst
