import math

import pytest
import torch
from pydantic import ValidationError

from conftest import blob_images
from modules.networks import (
    AEConfig,
    BackboneConfig,
    BackboneKindEnum,
    CombineModeEnum,
    LossPlan,
    ScalePresetEnum,
    VAEConfig,
)
from networks import GenConViT, GenConViTA, GenConViTB, GenConViTOutput, genconvit_config
from networks.autoencoders import AutoEncoder, VariationalAutoEncoder
from networks.backbones import (
    ConvNeXtBlock,
    ConvNeXtLike,
    HybridEmbed,
    SwinLike,
    WindowAttention,
    hybrid_embed,
)
from networks.genconvit import combined_predict, downsample_target
from shared.exceptions import ShapeMismatchError
from utils.nn_primitives import grad_check, mse_loss


def logits_for(p: float) -> torch.Tensor:
    return torch.tensor([[0.0, math.log(p / (1 - p))]], dtype=torch.float64)


@pytest.fixture(scope="module")
def paper_config():
    return genconvit_config(ScalePresetEnum.PAPER_TINY)


@pytest.fixture(scope="module")
def desk_config():
    return genconvit_config(ScalePresetEnum.DESK)


def test_paper_autoencoder_shapes(paper_config):
    torch.manual_seed(0)
    ae = AutoEncoder(paper_config.ae).eval()
    with torch.no_grad():
        latent = ae.encode(torch.rand(1, 3, 224, 224))
        assert latent.shape == (1, 256, 7, 7)
        assert ae.decode(latent).shape == (1, 3, 224, 224)


def test_paper_vae_shapes(paper_config):
    torch.manual_seed(0)
    vae = VariationalAutoEncoder(paper_config.vae).eval()
    with torch.no_grad():
        mu, logvar = vae.encode(torch.rand(1, 3, 224, 224))
        assert mu.shape == logvar.shape == (1, 12544)
        recon = vae.decode(mu)
    assert recon.shape == (1, 3, 112, 112)
    assert recon.min() >= 0 and recon.max() <= 1


def test_paper_hybrid_embed_shapes(paper_config):
    torch.manual_seed(0)
    backbone = ConvNeXtLike(paper_config.convnext)
    embed = HybridEmbed(backbone, paper_config.embed_dim)
    with torch.no_grad():
        features = backbone(torch.rand(1, 3, 224, 224))
        assert features.shape == (1, 96, 56, 56)
        tokens, grid = embed(torch.rand(1, 3, 224, 224))
    assert tokens.shape == (1, 3136, 768)
    assert grid == (56, 56)


def test_swin_backbone_at_window_seven():
    cfg = BackboneConfig(
        kind=BackboneKindEnum.SWIN_LIKE, depth=[2], width=[32], window=7, num_heads=2
    )
    torch.manual_seed(0)
    swin = SwinLike(cfg).eval()
    image = torch.rand(1, 3, 224, 224)
    before = {name: set(vars(module)) for name, module in swin.named_modules()}
    with torch.no_grad():
        pooled, maps = swin.forward_with_attention(image)
        assert torch.equal(swin(image), pooled)
    assert pooled.shape == (1, 32)
    assert {name: set(vars(module)) for name, module in swin.named_modules()} == before
    assert len(maps) == 2
    for attention in maps:
        assert attention.shape[-1] == attention.shape[-2] == 49
        assert torch.allclose(attention.sum(dim=-1), torch.ones(attention.shape[:-1]), atol=1e-5)


def test_swin_window_must_divide_grid():
    cfg = BackboneConfig(
        kind=BackboneKindEnum.SWIN_LIKE, depth=[1], width=[16], window=5, num_heads=1
    )
    with pytest.raises(ShapeMismatchError):
        SwinLike(cfg)(torch.rand(1, 3, 64, 64))


def test_geometry_validation():
    with pytest.raises(ValidationError):
        AEConfig(input_size=100)
    with pytest.raises(ValidationError):
        VAEConfig(input_size=224, latent_dim=1000)
    with pytest.raises(ValidationError):
        BackboneConfig(kind=BackboneKindEnum.SWIN_LIKE, depth=[1], width=[30], window=4, num_heads=4)


def test_desk_models_produce_logits(desk_config):
    torch.manual_seed(0)
    images = torch.rand(2, 3, 64, 64)
    for model in (GenConViTA(desk_config), GenConViTB(desk_config), GenConViT(desk_config)):
        model.eval()
        with torch.no_grad():
            output = model(images)
        assert output.logits.shape == (2, 2)
        scores = model.score(output)
        assert ((scores >= 0) & (scores <= 1)).all()


def test_desk_model_rejects_wrong_size(desk_config):
    with pytest.raises(ShapeMismatchError):
        GenConViTA(desk_config)(torch.rand(1, 3, 224, 224))


def test_combined_predict_examples():
    out_a = GenConViTOutput(logits=logits_for(0.6))
    out_b = GenConViTOutput(logits=logits_for(0.8))
    assert float(combined_predict(out_a, out_b, CombineModeEnum.AVG)) == pytest.approx(0.7)
    assert float(combined_predict(out_a, out_b, CombineModeEnum.MAX)) == pytest.approx(0.8)
    assert float(combined_predict(out_a, out_b, CombineModeEnum.A_ONLY)) == pytest.approx(0.6)
    assert float(combined_predict(out_a, out_b, CombineModeEnum.B_ONLY)) == pytest.approx(0.8)


def test_combined_score_matches_networks(desk_config):
    torch.manual_seed(1)
    model = GenConViT(desk_config).eval()
    images = torch.rand(3, 3, 64, 64)
    with torch.no_grad():
        p_a = model.network_a.predict_proba(images)
        p_b = model.network_b.predict_proba(images)
        combined = model.predict_proba(images)
    assert torch.allclose(combined, (p_a + p_b) / 2, atol=1e-6)


def test_eval_forward_is_deterministic(desk_config):
    torch.manual_seed(2)
    images = torch.rand(2, 3, 64, 64)
    for model in (GenConViTA(desk_config).eval(), GenConViTB(desk_config).eval()):
        with torch.no_grad():
            assert torch.equal(model(images).logits, model(images).logits)


def test_network_b_explicit_noise_is_reproducible(desk_config):
    torch.manual_seed(3)
    model = GenConViTB(desk_config).train()
    images = torch.rand(2, 3, 64, 64)
    noise = torch.randn(2, desk_config.vae.latent_dim)
    with torch.no_grad():
        first = model(images, noise=noise)
        second = model(images, noise=noise)
    assert torch.allclose(first.logits, second.logits)
    assert first.reconstruction.shape == (2, 3, 32, 32)


def test_ablating_reconstruction_changes_logits(desk_config):
    torch.manual_seed(4)
    model = GenConViTA(desk_config).eval()
    images = torch.rand(2, 3, 64, 64)
    with torch.no_grad():
        full = model(images).logits
        ablated = model(images, ablate_reconstruction=True).logits
    assert not torch.allclose(full, ablated)


def test_loss_components(desk_config):
    torch.manual_seed(5)
    images = torch.rand(2, 3, 64, 64)
    labels = torch.tensor([0, 1])

    model_a = GenConViTA(desk_config)
    assert set(model_a.losses(model_a(images), labels, images).components) == {"ce"}

    model_b = GenConViTB(desk_config)
    assert set(model_b.losses(model_b(images), labels, images).components) == {"ce", "mse"}

    with_kl = desk_config.model_copy(update={"loss": LossPlan(kl_weight=0.1)})
    model_kl = GenConViTB(with_kl)
    loss = model_kl.losses(model_kl(images), labels, images)
    assert set(loss.components) == {"ce", "mse", "kl"}
    assert torch.isfinite(loss.total)

    combined = GenConViT(desk_config)
    keys = set(combined.losses(combined(images), labels, images).components)
    assert keys == {"a_ce", "b_ce", "b_mse"}


def test_load_external_weights(desk_config):
    torch.manual_seed(6)
    model = GenConViTA(desk_config)
    pretrained = ConvNeXtLike(desk_config.convnext)
    loaded = model.load_external_weights(pretrained.state_dict(), prefix="hybrid.patch_embed.backbone.")
    assert "hybrid.patch_embed.backbone.stem.0.weight" in loaded
    assert torch.equal(model.hybrid.patch_embed.backbone.stem[0].weight, pretrained.stem[0].weight)

    with pytest.raises(KeyError):
        model.load_external_weights({"missing.weight": torch.zeros(1)})
    with pytest.raises(ShapeMismatchError):
        model.load_external_weights({"fc2.bias": torch.zeros(5)})


def test_grad_check_convnext_block():
    torch.manual_seed(7)
    block = ConvNeXtBlock(dim=4, mlp_ratio=2).double()
    with torch.no_grad():
        block.gamma.fill_(1.0)
    weights = torch.randn(1, 4, 5, 5, dtype=torch.float64)
    x = torch.randn(1, 4, 5, 5, dtype=torch.float64)
    assert grad_check(lambda t: (block(t) * weights).sum(), x) < 1e-3


def test_grad_check_window_attention():
    torch.manual_seed(8)
    attention = WindowAttention(dim=8, num_heads=2).double()
    weights = torch.randn(1, 4, 8, dtype=torch.float64)
    x = torch.randn(1, 4, 8, dtype=torch.float64)
    assert grad_check(lambda t: (attention(t)[0] * weights).sum(), x) < 1e-3


@pytest.mark.parametrize("network", [GenConViTA, GenConViTB])
def test_grad_check_network_loss_on_parameter_slice(network, desk_config):
    torch.manual_seed(9)
    model = network(desk_config).double().eval()
    images = torch.rand(2, 3, 64, 64, dtype=torch.float64)
    labels = torch.tensor([0.0, 1.0], dtype=torch.float64)
    kwargs = {}
    if network is GenConViTB:
        kwargs["noise"] = torch.randn(2, desk_config.vae.latent_dim, dtype=torch.float64)

    generator = torch.Generator().manual_seed(10)
    named = [(name, p) for name, p in model.named_parameters() if p.numel() >= 10]
    name, parameter = named[int(torch.randint(len(named), (1,), generator=generator))]
    indices = torch.randperm(parameter.numel(), generator=generator)[:10]
    base = parameter.detach().reshape(-1)

    def loss_of(values: torch.Tensor) -> torch.Tensor:
        replaced = base.index_copy(0, indices, values).view_as(parameter)
        output = torch.func.functional_call(model, {name: replaced}, (images,), kwargs)
        return model.losses(output, labels, images).total

    assert grad_check(loss_of, base[indices]) < 1e-3


def fit_reconstruction(module: torch.nn.Module, reconstruct, target: torch.Tensor, steps: int = 500) -> float:
    optimizer = torch.optim.Adam(module.parameters(), lr=3e-3)
    for _ in range(steps):
        optimizer.zero_grad()
        loss = mse_loss(target, reconstruct()).total
        loss.backward()
        optimizer.step()
    with torch.no_grad():
        return mse_loss(target, reconstruct()).value


def test_ae_decoder_overfits_tiny_set(desk_config):
    torch.manual_seed(11)
    images, _ = blob_images(2, 64, seed=11)
    ae = AutoEncoder(desk_config.ae)
    assert fit_reconstruction(ae, lambda: ae.decode(ae.encode(images)), images) < 1e-2


def test_vae_decoder_overfits_tiny_set(desk_config):
    torch.manual_seed(12)
    images, _ = blob_images(2, 64, seed=12)
    vae = VariationalAutoEncoder(desk_config.vae)
    target = downsample_target(images, desk_config.vae.recon_size)
    assert fit_reconstruction(vae, lambda: vae.decode(vae.encode(images)[0]), target) < 1e-2


def identity_projection(channels: int) -> torch.nn.Conv2d:
    projection = torch.nn.Conv2d(channels, channels, kernel_size=1)
    with torch.no_grad():
        projection.weight.copy_(torch.eye(channels).view(channels, channels, 1, 1))
        projection.bias.zero_()
    return projection


def test_hybrid_embed_identity_projection():
    features = torch.randn(768, 7, 7, generator=torch.Generator().manual_seed(13))
    with torch.no_grad():
        tokens = hybrid_embed(features, identity_projection(768))
    assert tokens.shape == (49, 768)
    assert torch.allclose(tokens, features.flatten(1).T, atol=1e-6)
    assert torch.allclose(tokens[3 * 7 + 5], features[:, 3, 5], atol=1e-6)


def test_hybrid_embed_follows_batch_order():
    generator = torch.Generator().manual_seed(14)
    features = torch.randn(5, 16, 4, 4, generator=generator)
    projection = torch.nn.Conv2d(16, 32, kernel_size=1)
    order = torch.randperm(5, generator=generator)
    with torch.no_grad():
        assert torch.allclose(
            hybrid_embed(features[order], projection), hybrid_embed(features, projection)[order], atol=1e-6
        )
