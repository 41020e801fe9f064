import logging
from pathlib import Path

from modules.evaluation import MetricsReport, PredictionRecord, ReportComparison
from repositories.report_repository import ReportRepository
from services.evaluation_service import build_report, compare_reports, rank_reports

__log__ = logging.getLogger(__name__)


class BenchmarkService:
    """Turns prediction dumps into report directories and a side-by-side comparison."""

    def __init__(self, output_dir: Path):
        self.output_dir = Path(output_dir)
        self.reports = ReportRepository(self.output_dir)

    def report(
        self,
        records: list[PredictionRecord],
        model: str | None,
        threshold: float = 0.5,
        baseline: list[PredictionRecord] | None = None,
        directory: str | Path = ".",
    ) -> tuple[MetricsReport, ReportComparison | None]:
        """
        Writes one report directory
        :param baseline: predictions of the same clips by a reference run
            (e.g. before fine-tuning); adds deltas.json when given
        """
        report = build_report(records, threshold, model)
        self.reports.emit_report(report, directory)
        comparison = None
        if baseline is not None:
            comparison = compare_reports(build_report(baseline, threshold, "baseline"), report)
            self.reports.emit_deltas(comparison, directory)
        return report, comparison

    def compare(
        self, dumps: dict[str, list[PredictionRecord]], threshold: float = 0.5
    ) -> list[MetricsReport]:
        """
        One report directory per model plus comparison.txt/.json sorted by AUC
        :param dumps: model name -> prediction records
        :return: reports in table order
        """
        reports = [
            self.report(records, model, threshold, directory=model)[0]
            for model, records in sorted(dumps.items())
        ]
        ranked = rank_reports(reports)
        self.reports.emit_comparison(ranked)
        __log__.info("compared %d models in %s", len(ranked), self.output_dir)
        return ranked
