from pydantic import BaseModel, Field

from modules.evaluation import PredictionRecord


class MetricsRequestDTO(BaseModel):
    records: list[PredictionRecord] = Field(..., description="Clip-level predictions")
    threshold: float = Field(0.5, description="Decision threshold", ge=0, le=1)
    model: str | None = Field(None, description="Name echoed in the report")
