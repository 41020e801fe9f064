from modules.networks import (
    AEConfig,
    BackboneConfig,
    BackboneKindEnum,
    GenConViTConfig,
    Meso4Config,
    ScalePresetEnum,
    VAEConfig,
)


def genconvit_config(preset: ScalePresetEnum | str) -> GenConViTConfig:
    """
    Builds the GenConViT configuration of a scale preset
    :param preset: paper_tiny keeps the published shapes, desk runs on a CPU
    :return: validated config
    """
    preset = ScalePresetEnum(preset)
    if preset == ScalePresetEnum.PAPER_TINY:
        return GenConViTConfig(
            preset=preset,
            ae=AEConfig(input_size=224, encoder_channels=[16, 32, 64, 128, 256]),
            vae=VAEConfig(
                input_size=224, encoder_channels=[16, 32, 64, 64], latent_dim=12544, recon_size=112
            ),
            convnext=BackboneConfig(
                kind=BackboneKindEnum.CONVNEXT_LIKE,
                depth=[3],
                width=[96],
                scale_preset=preset,
            ),
            swin=BackboneConfig(
                kind=BackboneKindEnum.SWIN_LIKE,
                depth=[2, 2],
                width=[768],
                window=7,
                num_heads=12,
                scale_preset=preset,
            ),
            head_hidden=256,
        )
    return GenConViTConfig(
        preset=preset,
        ae=AEConfig(input_size=64, encoder_channels=[8, 16, 32, 32, 32]),
        vae=VAEConfig(input_size=64, encoder_channels=[8, 16, 16, 16], latent_dim=256, recon_size=32),
        convnext=BackboneConfig(
            kind=BackboneKindEnum.CONVNEXT_LIKE, depth=[1], width=[16], scale_preset=preset
        ),
        swin=BackboneConfig(
            kind=BackboneKindEnum.SWIN_LIKE,
            depth=[1],
            width=[64],
            window=4,
            num_heads=2,
            scale_preset=preset,
        ),
        head_hidden=32,
    )


def meso4_config(preset: ScalePresetEnum | str, in_channels: int = 3) -> Meso4Config:
    preset = ScalePresetEnum(preset)
    if preset == ScalePresetEnum.PAPER_TINY:
        return Meso4Config(input_size=256, in_channels=in_channels)
    return Meso4Config(input_size=64, in_channels=in_channels, dropout=0.0)
