import json
import logging
from pathlib import Path

from pydantic import ValidationError

from modules.evaluation import (
    HEADLINE_METRICS,
    FrameScoreRecord,
    MetricsReport,
    PredictionRecord,
    ReportComparison,
)
from modules.training import EpochLogRecord
from repositories.base_repository import BaseRepository
from shared.exceptions import ManifestParseError

__log__ = logging.getLogger(__name__)

REPORT_FILE = "report.json"
METRICS_FILE = "metrics.txt"
ROC_FILE = "roc.tsv"
COMPARISON_TEXT_FILE = "comparison.txt"
COMPARISON_JSON_FILE = "comparison.json"
DELTAS_FILE = "deltas.json"


def render_metrics_table(report: MetricsReport) -> str:
    lines = ["metric\tvalue"]
    lines += [f"{label}\t{getattr(report, key):.6f}" for key, label in HEADLINE_METRICS]
    lines += [
        "",
        f"samples\t{report.n_samples}",
        f"threshold\t{report.threshold:.6f}",
        f"false negatives\t{report.confusion.fn}",
    ]
    lines += [f"  {method}\t{count}" for method, count in sorted(report.fn_by_method.items())]
    lines += [
        f"total seconds\t{report.timing.total_s:.6f}",
        f"seconds per sample\t{report.timing.mean_s_per_sample:.6f}",
    ]
    if report.degenerate:
        lines.append(f"degenerate\t{','.join(report.degenerate)}")
    return "\n".join(lines) + "\n"


def render_comparison_table(reports: list[MetricsReport]) -> str:
    """Fixed-width table, one row per report in the given order."""
    header = ["Model", *(label for _, label in HEADLINE_METRICS), "s/sample"]
    rows = [
        [
            report.model or "-",
            *(f"{getattr(report, key):.4f}" for key, _ in HEADLINE_METRICS),
            f"{report.timing.mean_s_per_sample:.4f}",
        ]
        for report in reports
    ]
    widths = [max(len(row[i]) for row in [header, *rows]) for i in range(len(header))]

    def render(row: list[str]) -> str:
        return "  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip()

    return "\n".join([render(header), render(["-" * w for w in widths]), *map(render, rows)]) + "\n"


class ReportRepository(BaseRepository):
    """Report directories plus the line-delimited dumps written by train and predict."""

    def emit_report(self, report: MetricsReport, directory: str | Path = ".") -> list[Path]:
        """
        Writes report.json, metrics.txt and roc.tsv into ``directory``
        :return: written paths
        """
        target = self.resolve(directory)
        roc = "".join(f"{fpr!r}\t{tpr!r}\n" for fpr, tpr in report.roc_points)
        paths = [
            self.save_text(target / REPORT_FILE, report.model_dump_json(indent=2) + "\n"),
            self.save_text(target / METRICS_FILE, render_metrics_table(report)),
            self.save_text(target / ROC_FILE, roc),
        ]
        __log__.info("report written to %s", target)
        return paths

    def read_report(self, directory: str | Path = ".") -> MetricsReport:
        path = self.resolve(directory) / REPORT_FILE
        return MetricsReport.model_validate_json(path.read_text(encoding="utf-8"))

    def emit_comparison(self, reports: list[MetricsReport], directory: str | Path = ".") -> list[Path]:
        target = self.resolve(directory)
        rows = [{"model": report.model, **report.headline()} for report in reports]
        return [
            self.save_text(target / COMPARISON_TEXT_FILE, render_comparison_table(reports)),
            self.save_text(target / COMPARISON_JSON_FILE, json.dumps(rows, indent=2) + "\n"),
        ]

    def emit_deltas(self, comparison: ReportComparison, directory: str | Path = ".") -> Path:
        return self.save_text(
            self.resolve(directory) / DELTAS_FILE, comparison.model_dump_json(indent=2) + "\n"
        )

    def write_predictions(self, name: str | Path, records: list[PredictionRecord]) -> Path:
        return self.save_lines(name, [record.model_dump(mode="json") for record in records])

    def read_predictions(self, name: str | Path) -> list[PredictionRecord]:
        return self._read_lines(name, PredictionRecord)

    def write_frame_scores(self, name: str | Path, records: list[FrameScoreRecord]) -> Path:
        return self.save_lines(name, [record.model_dump(mode="json") for record in records])

    def read_frame_scores(self, name: str | Path) -> list[FrameScoreRecord]:
        return self._read_lines(name, FrameScoreRecord)

    def append_epoch(self, name: str | Path, record: EpochLogRecord) -> Path:
        return self.append_line(name, record.model_dump(mode="json"))

    def read_epochs(self, name: str | Path) -> list[EpochLogRecord]:
        return self._read_lines(name, EpochLogRecord)

    def _read_lines(self, name: str | Path, model):
        path = self.resolve(name)
        records = []
        with path.open(encoding="utf-8") as fh:
            for number, raw in enumerate(fh, start=1):
                if not raw.strip():
                    continue
                try:
                    records.append(model.model_validate_json(raw))
                except ValidationError as exc:
                    raise ManifestParseError(number, f"{path}: {exc.errors()[0]['msg']}") from exc
        return records
