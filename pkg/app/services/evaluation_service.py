"""
Metrics harness over PredictionRecord lists. Fake is the positive class and a
score equal to the threshold predicts fake.
"""
import logging
from collections import Counter

import numpy as np
from scipy.stats import rankdata
from sklearn.metrics import auc as trapezoid_auc
from sklearn.metrics import roc_curve

from modules.evaluation import (
    HEADLINE_METRICS,
    ConfusionMatrix,
    MetricDelta,
    MetricsReport,
    PredictionRecord,
    ReportComparison,
    ScalarMetrics,
    TimingStats,
)
from shared.exceptions import AUCDisagreementError, EmptyInputError, UndefinedAUCError

__log__ = logging.getLogger(__name__)

AUC_AGREEMENT = 1e-9


def confusion(records: list[PredictionRecord], threshold: float = 0.5) -> ConfusionMatrix:
    if not records:
        raise EmptyInputError("no prediction records")
    counts = Counter((record.score >= threshold, record.is_fake) for record in records)
    return ConfusionMatrix(
        tp=counts[(True, True)],
        fp=counts[(True, False)],
        tn=counts[(False, False)],
        fn=counts[(False, True)],
    )


def scalar_metrics(cm: ConfusionMatrix) -> ScalarMetrics:
    """
    Accuracy, per-class accuracies, precision, recall and F1. A metric whose
    denominator is zero is reported as 0 and listed in ``degenerate``.
    """
    if cm.total == 0:
        raise EmptyInputError("confusion matrix is empty")
    degenerate: list[str] = []

    def ratio(name: str, numerator: float, denominator: float) -> float:
        if denominator == 0:
            degenerate.append(name)
            return 0.0
        return numerator / denominator

    precision = ratio("precision", cm.tp, cm.tp + cm.fp)
    recall = ratio("recall", cm.tp, cm.tp + cm.fn)
    metrics = {
        "accuracy": (cm.tp + cm.tn) / cm.total,
        "accuracy_real": ratio("accuracy_real", cm.tn, cm.tn + cm.fp),
        "accuracy_fake": recall,
        "precision": precision,
        "recall": recall,
        "f1": ratio("f1", 2 * precision * recall, precision + recall),
    }
    if "recall" in degenerate:
        degenerate.append("accuracy_fake")
    return ScalarMetrics(**metrics, degenerate=sorted(set(degenerate)))


def _labels_and_scores(records: list[PredictionRecord]) -> tuple[np.ndarray, np.ndarray]:
    labels = np.array([record.is_fake for record in records], dtype=np.int64)
    scores = np.array([record.score for record in records], dtype=np.float64)
    return labels, scores


def rank_auc(labels: np.ndarray, scores: np.ndarray) -> float:
    """Probability that a random fake outscores a random real, ties counted 1/2."""
    n_fake = int(labels.sum())
    n_real = len(labels) - n_fake
    ranks = rankdata(scores)
    return float((ranks[labels == 1].sum() - n_fake * (n_fake + 1) / 2) / (n_fake * n_real))


def roc_auc(records: list[PredictionRecord]) -> tuple[float, list[tuple[float, float]]]:
    """
    :return: rank-statistic AUC and the full threshold sweep as (fpr, tpr) points
    """
    labels, scores = _labels_and_scores(records)
    if labels.size == 0 or labels.min() == labels.max():
        raise UndefinedAUCError("AUC needs at least one real and one fake record")
    value = rank_auc(labels, scores)
    fpr, tpr, _ = roc_curve(labels, scores, drop_intermediate=False)
    curve = float(trapezoid_auc(fpr, tpr))
    if abs(curve - value) > AUC_AGREEMENT:
        raise AUCDisagreementError(f"rank AUC {value:.12f} and curve AUC {curve:.12f} disagree")
    return value, [(float(x), float(y)) for x, y in zip(fpr, tpr)]


def fn_by_method(records: list[PredictionRecord], threshold: float = 0.5) -> dict[str, int]:
    missed = Counter(r.method for r in records if r.is_fake and r.score < threshold)
    return dict(sorted(missed.items()))


def timing_stats(records: list[PredictionRecord]) -> TimingStats:
    if not records:
        raise EmptyInputError("no prediction records")
    return timing_from_totals(sum(record.latency_seconds for record in records), len(records))


def timing_from_totals(total_s: float, n: int) -> TimingStats:
    if n < 1:
        raise EmptyInputError("no samples were timed")
    return TimingStats(total_s=total_s, n=n, mean_s_per_sample=total_s / n)


def build_report(
    records: list[PredictionRecord], threshold: float = 0.5, model: str | None = None
) -> MetricsReport:
    cm = confusion(records, threshold)
    scalars = scalar_metrics(cm)
    value, points = roc_auc(records)
    return MetricsReport(
        model=model,
        threshold=threshold,
        n_samples=len(records),
        confusion=cm,
        auc=value,
        roc_points=points,
        fn_by_method=fn_by_method(records, threshold),
        timing=timing_stats(records),
        **scalars.model_dump(),
    )


def compare_reports(reference: MetricsReport, candidate: MetricsReport) -> ReportComparison:
    """Headline metric changes from ``reference`` (e.g. before fine-tuning) to ``candidate``."""
    deltas = {
        key: MetricDelta(
            reference=getattr(reference, key),
            candidate=getattr(candidate, key),
            delta=getattr(candidate, key) - getattr(reference, key),
        )
        for key, _ in HEADLINE_METRICS
    }
    return ReportComparison(reference=reference.model, candidate=candidate.model, deltas=deltas)


def rank_reports(reports: list[MetricsReport]) -> list[MetricsReport]:
    return sorted(reports, key=lambda report: (-report.auc, report.model or ""))
