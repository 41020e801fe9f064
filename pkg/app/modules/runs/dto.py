from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, field_validator

from modules.evaluation import AggregationEnum
from modules.networks import ScalePresetEnum


def _split_list(value):
    if isinstance(value, str):
        return [part.strip() for part in value.split(",") if part.strip()]
    return value


class RunConfig(BaseModel):
    """Resolved options of one command-line invocation."""

    model_config = ConfigDict(extra="forbid")

    command: str = Field(..., description="Subcommand")
    manifest: Path | None = Field(None, description="Manifest file")
    input_dir: Path | None = Field(None, description="Frame tree scanned by preprocess")
    models: list[str] = Field(default_factory=list, description="Detector names")
    preset: ScalePresetEnum = Field(ScalePresetEnum.DESK, description="Scale preset")
    epochs: list[int] | None = Field(None, description="Checkpoint epochs, overrides the model default")
    learning_rate: float | None = Field(None, description="Overrides the model default", gt=0)
    batch_size: int | None = Field(None, description="Overrides the model default", ge=1)
    augment_rate: float = Field(0.9, description="Training augmentation rate", ge=0, le=1)
    frames: int = Field(15, description="Frames sampled per clip", ge=1)
    threshold: float = Field(0.5, description="Decision threshold", ge=0, le=1)
    agg: AggregationEnum = Field(AggregationEnum.MEAN, description="Frame-to-clip aggregation")
    split: str | None = Field(None, description="train,val,test percentages, e.g. 80,15,5")
    anonymize: bool = Field(False, description="Replace sample ids by opaque tokens")
    output: Path = Field(Path("runs"), description="Output file or directory")
    checkpoints: list[Path] = Field(default_factory=list, description="Checkpoint files")
    dumps: list[str] = Field(default_factory=list, description="Prediction dumps, optionally MODEL=PATH")
    baseline: Path | None = Field(None, description="Reference prediction dump")
    resume: Path | None = Field(None, description="Checkpoint to resume training from")
    weights: Path | None = Field(None, description="External weights loaded before training")
    weights_prefix: str = Field("", description="Prepended to every external weight key")
    seed: int = Field(0, description="Seed for every random choice")
    device: str = Field("cpu", description="torch device")
    num_workers: int = Field(0, description="Loader workers", ge=0)
    log_level: str = Field("INFO", description="Logging level")
    host: str = Field("0.0.0.0", description="serve: bind address")
    port: int = Field(8000, description="serve: port")
    checkpoint_dir: Path | None = Field(None, description="serve: directory of <model>.ckpt files")

    @field_validator("models", "dumps", "checkpoints", "epochs", mode="before")
    @classmethod
    def comma_lists(cls, value):
        return _split_list(value)
