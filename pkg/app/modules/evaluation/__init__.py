from .dto import (
    HEADLINE_METRICS,
    ConfusionMatrix,
    FrameScoreRecord,
    MetricDelta,
    MetricsReport,
    PredictionRecord,
    ReportComparison,
    ScalarMetrics,
    TimingStats,
)
from .enum import AggregationEnum

__all__ = [
    "HEADLINE_METRICS",
    "ConfusionMatrix",
    "FrameScoreRecord",
    "MetricDelta",
    "MetricsReport",
    "PredictionRecord",
    "ReportComparison",
    "ScalarMetrics",
    "TimingStats",
    "AggregationEnum",
]
