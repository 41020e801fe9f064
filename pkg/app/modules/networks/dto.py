import math

from pydantic import BaseModel, Field, model_validator

from modules.networks.enum import (
    BackboneKindEnum,
    CombineModeEnum,
    ReconLossEnum,
    ScalePresetEnum,
)

MESO4_POOL_SIZES = (2, 2, 2, 4)
MESO4_KERNEL_SIZES = (3, 5, 5, 5)
MESO4_DOWNSAMPLE = math.prod(MESO4_POOL_SIZES)


def _is_power_of_two(value: int) -> bool:
    return value >= 1 and value & (value - 1) == 0


class AEConfig(BaseModel):
    input_size: int = Field(224, description="Side of the square input image, pixels", gt=0)
    input_channels: int = Field(3, description="Image channels", gt=0)
    encoder_channels: list[int] = Field(
        [16, 32, 64, 128, 256], description="Output channels of the 5 encoder stages"
    )
    kernel_size: int = Field(3, description="Encoder convolution kernel", gt=0)

    @model_validator(mode="after")
    def check_geometry(self) -> "AEConfig":
        if len(self.encoder_channels) != 5:
            raise ValueError("the autoencoder has exactly 5 encoder stages")
        if self.input_size % 2**5:
            raise ValueError(
                f"input_size {self.input_size} is not divisible by 2**5; "
                f"latent side would be {self.input_size / 2**5}"
            )
        return self

    @property
    def latent_side(self) -> int:
        return self.input_size // 2**5

    @property
    def latent_shape(self) -> tuple[int, int, int]:
        return self.encoder_channels[-1], self.latent_side, self.latent_side


class VAEConfig(BaseModel):
    input_size: int = Field(224, description="Side of the square input image, pixels", gt=0)
    input_channels: int = Field(3, description="Image channels", gt=0)
    encoder_channels: list[int] = Field(
        [16, 32, 64, 64], description="Output channels of the 4 encoder stages"
    )
    latent_dim: int = Field(12544, description="Length of mu and logvar", gt=0)
    recon_size: int = Field(112, description="Side of the reconstructed image", gt=0)
    leaky_slope: float = Field(0.01, description="LeakyReLU negative slope", gt=0, lt=1)

    @model_validator(mode="after")
    def check_geometry(self) -> "VAEConfig":
        if len(self.encoder_channels) != 4:
            raise ValueError("the variational encoder has exactly 4 stages")
        if self.input_size % 2**4:
            raise ValueError(f"input_size {self.input_size} is not divisible by 2**4")
        flat = self.encoder_channels[-1] * self.latent_side**2
        if flat != self.latent_dim:
            raise ValueError(
                f"flattened encoder output {flat} differs from latent_dim {self.latent_dim}"
            )
        if self.recon_size % self.latent_side or not _is_power_of_two(
            self.recon_size // self.latent_side
        ):
            raise ValueError(
                f"recon_size {self.recon_size} is not a power-of-two multiple "
                f"of the latent side {self.latent_side}"
            )
        return self

    @property
    def latent_side(self) -> int:
        return self.input_size // 2**4

    @property
    def latent_grid(self) -> tuple[int, int, int]:
        return self.encoder_channels[-1], self.latent_side, self.latent_side

    @property
    def decoder_stages(self) -> int:
        return (self.recon_size // self.latent_side).bit_length() - 1


class BackboneConfig(BaseModel):
    kind: BackboneKindEnum = Field(..., description="Backbone family")
    depth: list[int] = Field(..., description="Blocks per stage")
    width: list[int] = Field(
        ..., description="Channels per stage (convnext_like) or [embed width] (swin_like)"
    )
    window: int | None = Field(None, description="Attention window side (swin_like only)")
    num_heads: int = Field(1, description="Attention heads (swin_like only)", gt=0)
    patch_size: int = Field(4, description="Stem / patch embedding stride", gt=0)
    mlp_ratio: int = Field(4, description="Hidden expansion of block MLPs", gt=0)
    scale_preset: ScalePresetEnum = Field(ScalePresetEnum.DESK, description="Preset echo")

    @model_validator(mode="after")
    def check_stages(self) -> "BackboneConfig":
        if not self.depth or any(d < 1 for d in self.depth):
            raise ValueError("every stage needs at least one block")
        if self.kind == BackboneKindEnum.CONVNEXT_LIKE:
            if len(self.width) != len(self.depth):
                raise ValueError("convnext_like needs one width per stage")
        else:
            if len(self.width) != 1:
                raise ValueError("swin_like keeps a single embed width")
            if self.window is None or self.window < 1:
                raise ValueError("swin_like needs a positive window")
            if self.width[0] % self.num_heads:
                raise ValueError("embed width must be divisible by num_heads")
        return self

    @property
    def out_channels(self) -> int:
        return self.width[-1]


class LossPlan(BaseModel):
    ce_weight: float = Field(1.0, description="Weight of the cross entropy term", ge=0)
    recon_weight: float = Field(
        1.0, description="Weight of the reconstruction term (Network B)", ge=0
    )
    kl_weight: float = Field(0.0, description="Weight of the KL term (Network B)", ge=0)
    recon_loss: ReconLossEnum = Field(ReconLossEnum.MSE, description="Reconstruction loss")


class GenConViTConfig(BaseModel):
    preset: ScalePresetEnum = Field(..., description="Scale preset the config came from")
    ae: AEConfig
    vae: VAEConfig
    convnext: BackboneConfig
    swin: BackboneConfig
    head_hidden: int = Field(..., description="Hidden width of the classification head", gt=0)
    loss: LossPlan = Field(default_factory=LossPlan)
    combine_mode: CombineModeEnum = Field(CombineModeEnum.AVG, description="Score combination")

    @property
    def input_size(self) -> int:
        return self.ae.input_size

    @property
    def embed_dim(self) -> int:
        return self.swin.width[0]


class Meso4Config(BaseModel):
    input_size: int = Field(256, description="Side of the square input image", gt=0)
    in_channels: int = Field(3, description="Input channels", gt=0)
    widths: list[int] = Field([8, 8, 16, 16], description="Channels of the 4 conv blocks")
    dropout: float = Field(0.5, description="Dropout before both dense layers", ge=0, lt=1)
    hidden: int = Field(16, description="Width of the first dense layer", gt=0)
    leaky_slope: float = Field(0.1, description="LeakyReLU slope of the head", gt=0, lt=1)

    @model_validator(mode="after")
    def check_geometry(self) -> "Meso4Config":
        if len(self.widths) != 4:
            raise ValueError("Meso4 has exactly 4 conv blocks")
        if self.input_size % MESO4_DOWNSAMPLE:
            raise ValueError(
                f"Meso4 pooling {MESO4_POOL_SIZES} needs input_size divisible by {MESO4_DOWNSAMPLE}"
            )
        return self

    @property
    def flat_features(self) -> int:
        return self.widths[-1] * (self.input_size // MESO4_DOWNSAMPLE) ** 2
