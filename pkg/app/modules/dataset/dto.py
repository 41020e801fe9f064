import math

from pydantic import BaseModel, Field, field_validator, model_validator

from modules.dataset.enum import LabelEnum, SplitEnum, TransformEnum

ORIGINAL_METHOD = "original"
MANIFEST_FORMAT_VERSION = 1


class ManifestEntry(BaseModel):
    sample_id: str = Field(..., description="Opaque clip identifier", min_length=1)
    frames: list[str] = Field(..., description="Ordered frame paths, relative to the manifest root")
    label: LabelEnum = Field(..., description="real or fake")
    method: str = Field(..., description="Manipulation method tag, 'original' for real clips")
    split: SplitEnum = Field(SplitEnum.UNASSIGNED, description="Split assignment")

    @field_validator("frames")
    @classmethod
    def frames_not_empty(cls, value: list[str]) -> list[str]:
        if not value:
            raise ValueError("frames must not be empty")
        return value

    @model_validator(mode="after")
    def real_is_original(self) -> "ManifestEntry":
        if self.label == LabelEnum.REAL and self.method != ORIGINAL_METHOD:
            raise ValueError(f"real entries must have method {ORIGINAL_METHOD!r}")
        return self

    @property
    def is_fake(self) -> bool:
        return self.label == LabelEnum.FAKE


class SplitSpec(BaseModel):
    train: float = Field(..., description="Train fraction", ge=0)
    val: float = Field(..., description="Validation fraction", ge=0)
    test: float = Field(..., description="Test fraction", ge=0)
    seed: int = Field(0, description="Shuffle seed")

    @model_validator(mode="after")
    def fractions_sum_to_one(self) -> "SplitSpec":
        total = self.train + self.val + self.test
        if not math.isclose(total, 1.0, rel_tol=0.0, abs_tol=1e-9):
            raise ValueError(f"split fractions sum to {total}, expected 1")
        return self

    @classmethod
    def from_percentages(cls, text: str, seed: int = 0) -> "SplitSpec":
        """
        Parses "80,15,5" style percentages
        :param text: three comma separated numbers summing to 100
        :param seed: shuffle seed
        """
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected train,val,test percentages, got {text!r}")
        train, val, test = (float(p) / 100.0 for p in parts)
        return cls(train=train, val=val, test=test, seed=seed)


class ManifestHeader(BaseModel):
    format_version: int = Field(MANIFEST_FORMAT_VERSION, description="Manifest format version")
    root: str = Field(".", description="Directory frame paths are relative to")
    split: SplitSpec | None = Field(None, description="Split applied by preprocess")
    anonymized: bool = Field(False, description="Whether sample ids were anonymized")


class AugmentationConfig(BaseModel):
    rate: float = Field(0.9, description="Probability of altering an image", ge=0, le=1)
    transforms: list[TransformEnum] = Field(
        default_factory=lambda: list(TransformEnum), description="Enabled transforms"
    )
    max_chain: int = Field(3, description="Longest transform chain per image", ge=1)
    rotate_limit: float = Field(30.0, description="Rotation bound, degrees", ge=0)
    shift_limit: float = Field(0.1, description="Shift bound, fraction of the side", ge=0)
    scale_range: tuple[float, float] = Field((0.9, 1.1), description="Scale range")
    noise_std: float = Field(0.05, description="Upper bound of the gaussian noise std", gt=0)
    clahe_clip: float = Field(2.0, description="CLAHE clip limit", ge=1)
    brightness_limit: float = Field(0.2, description="Brightness change bound", ge=0)
    contrast_limit: float = Field(0.2, description="Contrast change bound", ge=0)
    hue_shift: float = Field(10.0, description="Hue shift bound, degrees", ge=0)
    seed: int = Field(0, description="Base seed")

    @field_validator("transforms")
    @classmethod
    def transforms_not_empty(cls, value: list[TransformEnum]) -> list[TransformEnum]:
        if not value:
            raise ValueError("at least one transform must be enabled")
        return value


class DatasetStats(BaseModel):
    total: int = Field(0, description="Number of entries")
    by_label: dict[str, int] = Field(default_factory=dict, description="Counts per label")
    by_method: dict[str, int] = Field(default_factory=dict, description="Counts per method")
    by_split: dict[str, int] = Field(default_factory=dict, description="Counts per split")
