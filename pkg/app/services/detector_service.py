import asyncio
import logging
import threading
from collections import OrderedDict
from pathlib import Path

from config import settings
from modules.dataset import LabelEnum
from modules.detectors.dto import DetectorDTO, DetectorListDTO, DetectorPredictionDTO
from modules.detectors.enum import DetectorPredictEnum
from networks import DETECTOR_REGISTRY, Detector
from repositories.checkpoint_repository import CheckpointRepository
from services.prediction_service import PredictionService
from services.training_service import restore_detector
from shared.exceptions import ImageDecodeError, UnknownDetectorError

__log__ = logging.getLogger(__name__)


class LoadedDetectors:
    """Least recently used detectors keyed by checkpoint path and mtime."""

    def __init__(self):
        self._entries: OrderedDict[Path, tuple[float, Detector]] = OrderedDict()
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, path: Path) -> bool:
        return path in self._entries

    def get(self, path: Path, repository: CheckpointRepository, capacity: int) -> Detector:
        """
        Returns the detector for a checkpoint, loading it on a miss or when the file changed
        :param path: checkpoint file
        :param repository: repository rooted at the checkpoint directory
        :param capacity: most detectors kept in memory
        :return: detector in eval mode
        """
        mtime = path.stat().st_mtime
        with self._lock:
            cached = self._entries.get(path)
            if cached is not None and cached[0] == mtime:
                self._entries.move_to_end(path)
                return cached[1]
            detector = restore_detector(repository.load(path.name))
            self._entries[path] = (mtime, detector)
            self._entries.move_to_end(path)
            __log__.info("loaded %s", path)
            while len(self._entries) > max(capacity, 1):
                evicted, _ = self._entries.popitem(last=False)
                __log__.info("evicted %s", evicted)
            return detector

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()


LOADED_DETECTORS = LoadedDetectors()


def find_checkpoint(directory: Path, name: str) -> Path | None:
    """``<name>.ckpt`` if present, else the highest ``<name>_epochNNN.ckpt``."""
    exact = directory / f"{name}.ckpt"
    if exact.is_file():
        return exact
    sweep = sorted(directory.glob(f"{name}_epoch*.ckpt"))
    return sweep[-1] if sweep else None


class DetectorService:
    def __init__(self):
        self.checkpoint_dir = Path(settings.serve.checkpoint_dir)
        self.checkpoints = CheckpointRepository(self.checkpoint_dir)

    def _detector(self, path: Path) -> Detector:
        return LOADED_DETECTORS.get(path, self.checkpoints, settings.serve.max_loaded)

    async def get_detectors_service(self) -> DetectorListDTO:
        """
        Lists the registry
        :return: detectors sorted by name
        """
        return DetectorListDTO(
            detectors=[
                DetectorDTO(
                    name=handle.name,
                    bundled=handle.bundled,
                    description=handle.description,
                    has_checkpoint=find_checkpoint(self.checkpoint_dir, handle.name) is not None,
                )
                for handle in DETECTOR_REGISTRY.handles()
            ]
        )

    async def predict_service(
        self, name: str, data: bytes, threshold: float
    ) -> DetectorPredictionDTO | DetectorPredictEnum:
        """
        Scores one encoded image
        :param name: detector name
        :param data: image file content
        :param threshold: decision threshold
        :return: prediction or the reason it failed
        """
        try:
            handle = DETECTOR_REGISTRY.get(name)
        except UnknownDetectorError:
            return DetectorPredictEnum.NOT_FOUND
        if not handle.bundled:
            return DetectorPredictEnum.NOT_BUNDLED
        path = find_checkpoint(self.checkpoint_dir, name)
        if path is None:
            return DetectorPredictEnum.NOT_FOUND

        loop = asyncio.get_running_loop()
        service = PredictionService(await loop.run_in_executor(None, self._detector, path))
        try:
            score, latency = await loop.run_in_executor(None, service.predict_image, data)
        except ImageDecodeError:
            return DetectorPredictEnum.DECODE_ERROR
        return DetectorPredictionDTO(
            model=name,
            score=score,
            label=LabelEnum.FAKE if score >= threshold else LabelEnum.REAL,
            threshold=threshold,
            latency_seconds=latency,
        )
