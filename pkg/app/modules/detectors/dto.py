from pydantic import BaseModel, Field

from modules.dataset import LabelEnum


class DetectorDTO(BaseModel):
    name: str = Field(..., description="Registry name, also the CLI --model value")
    bundled: bool = Field(..., description="False for reserved names that need an external plug-in")
    description: str = Field("", description="Short description")
    has_checkpoint: bool = Field(..., description="Whether a trained checkpoint is available")


class DetectorListDTO(BaseModel):
    detectors: list[DetectorDTO] = Field(..., description="Registered detectors, sorted by name")


class DetectorPredictionDTO(BaseModel):
    model: str = Field(..., description="Detector that scored the image")
    score: float = Field(..., description="Fake probability", ge=0, le=1)
    label: LabelEnum = Field(..., description="Predicted label at the threshold")
    threshold: float = Field(..., description="Decision threshold", ge=0, le=1)
    latency_seconds: float = Field(..., description="Decode, resize and forward time", ge=0)
