from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import torch
from pydantic import BaseModel, Field, field_validator

from modules.dataset import AugmentationConfig
from modules.networks import LossPlan, ScalePresetEnum

CHECKPOINT_FORMAT_VERSION = 1

# (learning rate, batch size, epoch sweep) per detector family
MODEL_DEFAULTS: dict[str, tuple[float, int, list[int]]] = {
    "genconvit_ae": (1e-4, 32, [4, 5, 8, 10]),
    "genconvit_vae": (1e-4, 16, [4, 5, 6, 8, 10]),
    "genconvit": (1e-4, 16, [4, 5, 8, 10]),
}
BASELINE_DEFAULTS: tuple[float, int, list[int]] = (2e-4, 32, [10])


class TrainConfig(BaseModel):
    model: str = Field(..., description="Registered detector name")
    preset: ScalePresetEnum = Field(ScalePresetEnum.DESK, description="Scale preset")
    learning_rate: float = Field(1e-4, description="Adam learning rate", gt=0)
    batch_size: int = Field(32, description="Mini-batch size", ge=1)
    epochs: list[int] = Field([10], description="Epochs at which a checkpoint is written")
    betas: tuple[float, float] = Field((0.9, 0.999), description="Adam betas")
    adam_eps: float = Field(1e-8, description="Adam epsilon", gt=0)
    loss: LossPlan | None = Field(None, description="Loss plan override for GenConViT networks")
    augmentation: AugmentationConfig | None = Field(
        None, description="Training-time augmentation, disabled when absent"
    )
    frames_per_video: int = Field(15, description="Frames sampled per clip", ge=1)
    seed: int = Field(0, description="Seed for initialisation, shuffling and augmentation")
    checkpoint_in: Path | None = Field(None, description="Checkpoint to resume from")
    checkpoint_out: Path | None = Field(None, description="Directory for sweep checkpoints")
    divergence_threshold: float = Field(1e6, description="Abort when a loss exceeds this", gt=0)
    device: str = Field("cpu", description="torch device")
    num_workers: int = Field(0, description="DataLoader worker processes", ge=0)

    @field_validator("epochs")
    @classmethod
    def sorted_positive_epochs(cls, value: list[int]) -> list[int]:
        if not value:
            raise ValueError("epochs must not be empty")
        if any(epoch < 1 for epoch in value):
            raise ValueError("epochs must be >= 1")
        return sorted(set(value))

    @property
    def total_epochs(self) -> int:
        return self.epochs[-1]

    @classmethod
    def for_model(cls, name: str, **overrides: Any) -> "TrainConfig":
        """
        Config with the per-network training defaults
        :param name: detector name
        :param overrides: field values replacing the defaults; None values are ignored
        """
        lr, batch, epochs = MODEL_DEFAULTS.get(name, BASELINE_DEFAULTS)
        values = {"model": name, "learning_rate": lr, "batch_size": batch, "epochs": epochs}
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


class EpochLogRecord(BaseModel):
    epoch: int = Field(..., description="1-based epoch number")
    train_loss: float = Field(..., description="Mean training loss")
    train_acc: float = Field(..., description="Training accuracy")
    val_loss: float | None = Field(None, description="Validation loss")
    val_acc: float | None = Field(None, description="Validation accuracy")
    wall_seconds: float = Field(..., description="Epoch wall time")


class EpochEvaluation(BaseModel):
    loss: float = Field(..., description="Mean loss")
    accuracy: float = Field(..., description="Fraction classified correctly at 0.5", ge=0, le=1)


@dataclass
class Checkpoint:
    """
    Everything needed to rebuild and resume a detector.

    Attributes:
        model_name (str): registry name.
        preset (str): scale preset the detector was built with.
        config (dict): JSON echo of the detector config.
        state_dict (dict[str, torch.Tensor]): weights keyed by layer name.
        optimizer_state (dict | None): Adam state.
        epoch (int): completed epochs.
        history (list[dict]): epoch log records so far.
        format_version (int): file format version.
    """

    model_name: str
    preset: str
    config: dict
    state_dict: dict[str, torch.Tensor]
    optimizer_state: dict | None = None
    epoch: int = 0
    history: list[dict] = field(default_factory=list)
    format_version: int = CHECKPOINT_FORMAT_VERSION
