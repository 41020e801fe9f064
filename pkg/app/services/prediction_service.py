import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import torch

from modules.dataset import FrameSamplingEnum, ManifestEntry
from modules.evaluation import AggregationEnum, FrameScoreRecord, PredictionRecord
from networks import Detector
from services.dataset_service import sample_frames
from utils.image_processor import ImageProcessor

__log__ = logging.getLogger(__name__)


def aggregate_scores(
    scores: list[float], mode: AggregationEnum = AggregationEnum.MEAN, threshold: float = 0.5
) -> float:
    """
    Clip score from frame scores
    :param mode: mean or max of the frame probabilities; majority gives the
        fraction of frames scored at or above ``threshold``
    """
    if not scores:
        raise ValueError("no frame scores to aggregate")
    values = np.asarray(scores, dtype=np.float64)
    mode = AggregationEnum(mode)
    if mode == AggregationEnum.MAX:
        return float(values.max())
    if mode == AggregationEnum.MAJORITY:
        return float((values >= threshold).mean())
    return float(values.mean())


class PredictionService:
    """Scores clips frame by frame with a trained detector; weights are never mutated."""

    def __init__(
        self,
        model: Detector,
        frames_per_video: int = 15,
        seed: int = 0,
        aggregation: AggregationEnum = AggregationEnum.MEAN,
        threshold: float = 0.5,
        num_workers: int = 0,
        strategy: FrameSamplingEnum = FrameSamplingEnum.UNIFORM,
    ):
        self.model = model.eval()
        self.frames_per_video = frames_per_video
        self.seed = seed
        self.aggregation = AggregationEnum(aggregation)
        self.threshold = threshold
        self.num_workers = num_workers
        self.strategy = strategy

    def _load(self, paths: list[Path], pool: ThreadPoolExecutor | None) -> torch.Tensor:
        size = self.model.input_size
        if pool is None:
            images = [ImageProcessor.resize_normalize(path, size) for path in paths]
        else:
            images = list(pool.map(lambda path: ImageProcessor.resize_normalize(path, size), paths))
        return torch.stack(images)

    @torch.no_grad()
    def score_images(self, images: torch.Tensor) -> list[float]:
        return [float(score) for score in self.model.predict_proba(images)]

    def predict_entries(
        self, entries: list[ManifestEntry], root: Path
    ) -> tuple[list[PredictionRecord], list[FrameScoreRecord]]:
        """
        One PredictionRecord per clip, in input order, plus the per-frame scores
        :param root: directory the manifest frame paths are relative to
        """
        records: list[PredictionRecord] = []
        frame_records: list[FrameScoreRecord] = []
        pool = ThreadPoolExecutor(self.num_workers) if self.num_workers > 0 else None
        try:
            for entry in entries:
                started = time.perf_counter()
                frames = sample_frames(entry, self.frames_per_video, self.seed, self.strategy)
                scores = self.score_images(self._load([Path(root) / f for f in frames], pool))
                score = aggregate_scores(scores, self.aggregation, self.threshold)
                latency = time.perf_counter() - started
                records.append(
                    PredictionRecord(
                        sample_id=entry.sample_id,
                        score=min(max(score, 0.0), 1.0),
                        true_label=entry.label,
                        method=entry.method,
                        latency_seconds=latency,
                    )
                )
                frame_records += [
                    FrameScoreRecord(sample_id=entry.sample_id, frame=frame, score=value)
                    for frame, value in zip(frames, scores)
                ]
                __log__.debug("%s: %d frames, score %.6f, %.3fs", entry.sample_id, len(frames), score, latency)
        finally:
            if pool is not None:
                pool.shutdown()
        return records, frame_records

    def predict_image(self, data: bytes) -> tuple[float, float]:
        """
        Scores one encoded image
        :return: fake probability and latency in seconds
        """
        started = time.perf_counter()
        image = ImageProcessor.resize_normalize(data, self.model.input_size)
        score = self.score_images(image.unsqueeze(0))[0]
        return score, time.perf_counter() - started
