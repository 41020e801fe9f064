from pydantic import BaseModel, Field

from modules.dataset import LabelEnum

# column order of every rendered metrics table
HEADLINE_METRICS: tuple[tuple[str, str], ...] = (
    ("accuracy", "Acc"),
    ("accuracy_real", "Acc Real"),
    ("accuracy_fake", "Acc Fake"),
    ("auc", "AUC"),
    ("f1", "F1"),
    ("precision", "Prec"),
    ("recall", "Recall"),
)


class PredictionRecord(BaseModel):
    sample_id: str = Field(..., description="Clip identifier")
    score: float = Field(..., description="Fake probability", ge=0, le=1)
    true_label: LabelEnum = Field(..., description="Ground truth")
    method: str = Field(..., description="Manipulation method tag")
    latency_seconds: float = Field(0.0, description="Wall time spent on this clip", ge=0)

    @property
    def is_fake(self) -> bool:
        return self.true_label == LabelEnum.FAKE


class FrameScoreRecord(BaseModel):
    sample_id: str = Field(..., description="Clip identifier")
    frame: str = Field(..., description="Frame path as listed in the manifest")
    score: float = Field(..., description="Fake probability of the frame", ge=0, le=1)


class ConfusionMatrix(BaseModel):
    tp: int = Field(0, description="Fakes predicted fake", ge=0)
    fp: int = Field(0, description="Reals predicted fake", ge=0)
    tn: int = Field(0, description="Reals predicted real", ge=0)
    fn: int = Field(0, description="Fakes predicted real", ge=0)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


class ScalarMetrics(BaseModel):
    accuracy: float = Field(..., ge=0, le=1)
    accuracy_real: float = Field(..., ge=0, le=1)
    accuracy_fake: float = Field(..., ge=0, le=1)
    precision: float = Field(..., ge=0, le=1)
    recall: float = Field(..., ge=0, le=1)
    f1: float = Field(..., ge=0, le=1)
    degenerate: list[str] = Field(
        default_factory=list, description="Metrics whose denominator was zero, reported as 0"
    )


class TimingStats(BaseModel):
    total_s: float = Field(..., description="Summed latency, seconds", ge=0)
    n: int = Field(..., description="Number of samples", ge=1)
    mean_s_per_sample: float = Field(..., description="total_s / n", ge=0)


class MetricsReport(BaseModel):
    model: str | None = Field(None, description="Detector the predictions came from")
    threshold: float = Field(0.5, description="Decision threshold", ge=0, le=1)
    n_samples: int = Field(..., description="Number of scored clips")
    confusion: ConfusionMatrix
    accuracy: float = Field(..., ge=0, le=1)
    accuracy_real: float = Field(..., ge=0, le=1)
    accuracy_fake: float = Field(..., ge=0, le=1)
    precision: float = Field(..., ge=0, le=1)
    recall: float = Field(..., ge=0, le=1)
    f1: float = Field(..., ge=0, le=1)
    auc: float = Field(..., ge=0, le=1)
    degenerate: list[str] = Field(default_factory=list)
    roc_points: list[tuple[float, float]] = Field(
        default_factory=list, description="(fpr, tpr) pairs from (0, 0) to (1, 1)"
    )
    fn_by_method: dict[str, int] = Field(default_factory=dict)
    timing: TimingStats

    def headline(self) -> dict[str, float]:
        return {key: getattr(self, key) for key, _ in HEADLINE_METRICS}


class MetricDelta(BaseModel):
    reference: float
    candidate: float
    delta: float


class ReportComparison(BaseModel):
    reference: str | None = Field(None, description="Model of the reference report")
    candidate: str | None = Field(None, description="Model of the candidate report")
    deltas: dict[str, MetricDelta] = Field(..., description="Headline metric -> change")
