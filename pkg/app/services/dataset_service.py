import logging
import math
import os
import zlib
from collections import Counter, defaultdict
from pathlib import Path
from typing import Protocol

import numpy as np
import torch
from torch.utils.data import Dataset

from modules.dataset import (
    ORIGINAL_METHOD,
    AugmentationConfig,
    DatasetStats,
    FrameSamplingEnum,
    LabelEnum,
    ManifestEntry,
    ManifestHeader,
    SplitEnum,
    SplitSpec,
)
from repositories.manifest_repository import AnonymizationMapRepository, ManifestRepository
from shared.exceptions import EmptyInputError, SplitAssignmentError
from utils.image_processor import ImageProcessor, augment

__log__ = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".webp"}
TOKEN_BYTES = 8


class FaceCropAdapter(Protocol):
    def __call__(self, frame: Path) -> Path:
        """Returns the path of the face crop for ``frame``."""


class IdentityFaceCrop:
    """Frames are already face crops."""

    def __call__(self, frame: Path) -> Path:
        return frame


def _frames_in(folder: Path) -> list[Path]:
    return sorted(p for p in folder.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def _relative(path: Path, root: Path) -> str:
    try:
        return path.relative_to(root).as_posix()
    except ValueError:
        return path.resolve().as_posix()


def scan_frame_tree(root: Path, adapter: FaceCropAdapter | None = None) -> list[ManifestEntry]:
    """
    Discovers clips laid out as ``real/<clip>/*`` and ``fake/<method>/<clip>/*``
    :param root: dataset directory
    :param adapter: maps every frame to its face crop
    :return: unassigned entries sorted by sample_id, frame paths relative to ``root``
    """
    root = Path(root)
    adapter = adapter or IdentityFaceCrop()
    clips: list[tuple[LabelEnum, str, Path]] = []
    real_dir, fake_dir = root / LabelEnum.REAL.value, root / LabelEnum.FAKE.value
    if real_dir.is_dir():
        clips += [(LabelEnum.REAL, ORIGINAL_METHOD, d) for d in sorted(real_dir.iterdir()) if d.is_dir()]
    if fake_dir.is_dir():
        for method_dir in sorted(d for d in fake_dir.iterdir() if d.is_dir()):
            clips += [
                (LabelEnum.FAKE, method_dir.name, d) for d in sorted(method_dir.iterdir()) if d.is_dir()
            ]

    entries = []
    for label, method, clip in clips:
        frames = _frames_in(clip)
        if not frames:
            __log__.warning("skipping %s: no frames", clip)
            continue
        entries.append(
            ManifestEntry(
                sample_id=f"{label.value}_{method}_{clip.name}",
                frames=[_relative(adapter(frame), root) for frame in frames],
                label=label,
                method=method,
            )
        )
    if not entries:
        raise EmptyInputError(f"no clips found under {root} (expected real/<clip>/ and fake/<method>/<clip>/)")
    return sorted(entries, key=lambda e: e.sample_id)


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def _largest_remainder(total: int, weights: dict[str, int], caps: dict[str, int]) -> dict[str, int]:
    whole = sum(weights.values())
    ideal = {key: total * weight / whole for key, weight in weights.items()}
    quota = {key: min(int(math.floor(value)), caps[key]) for key, value in ideal.items()}
    order = sorted(ideal, key=lambda key: (-(ideal[key] - math.floor(ideal[key])), key))
    while sum(quota.values()) < total:
        open_keys = [key for key in order if quota[key] < caps[key]]
        if not open_keys:
            break
        for key in open_keys:
            if sum(quota.values()) == total:
                break
            quota[key] += 1
    return quota


def split_dataset(entries: list[ManifestEntry], spec: SplitSpec) -> list[ManifestEntry]:
    """
    Stratified, seeded train/val/test assignment. Validation and test sizes
    are round-half-up of fraction * N, train takes the remainder; each label
    receives its share by largest remainder.
    :return: new entries in input order with ``split`` set
    """
    assigned = [e.sample_id for e in entries if e.split != SplitEnum.UNASSIGNED]
    if assigned:
        raise SplitAssignmentError(f"{len(assigned)} entries already have a split, e.g. {assigned[0]!r}")
    n = len(entries)
    if n == 0:
        return []
    n_val = min(_round_half_up(spec.val * n), n)
    n_test = min(_round_half_up(spec.test * n), n - n_val)

    groups: dict[str, list[ManifestEntry]] = defaultdict(list)
    for entry in sorted(entries, key=lambda e: e.sample_id):
        groups[entry.label.value].append(entry)
    sizes = {label: len(group) for label, group in groups.items()}
    val_quota = _largest_remainder(n_val, sizes, sizes)
    test_quota = _largest_remainder(
        n_test, sizes, {label: sizes[label] - val_quota[label] for label in sizes}
    )

    rng = np.random.default_rng(spec.seed)
    split_of: dict[str, SplitEnum] = {}
    for label in sorted(groups):
        group = groups[label]
        order = rng.permutation(len(group))
        for rank, index in enumerate(order):
            if rank < val_quota[label]:
                split = SplitEnum.VAL
            elif rank < val_quota[label] + test_quota[label]:
                split = SplitEnum.TEST
            else:
                split = SplitEnum.TRAIN
            split_of[group[index].sample_id] = split
    return [entry.model_copy(update={"split": split_of[entry.sample_id]}) for entry in entries]


def sample_frames(
    entry: ManifestEntry,
    k: int,
    seed: int = 0,
    strategy: FrameSamplingEnum = FrameSamplingEnum.UNIFORM,
) -> list[str]:
    """
    Picks at most ``k`` frames in clip order
    :param strategy: uniform picks the centres of k equal segments; random
        draws k distinct frames from a generator seeded by (seed, sample_id)
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    n = len(entry.frames)
    if n <= k:
        return list(entry.frames)
    if FrameSamplingEnum(strategy) == FrameSamplingEnum.RANDOM:
        rng = np.random.default_rng([seed, zlib.crc32(entry.sample_id.encode("utf-8"))])
        indices = sorted(int(i) for i in rng.choice(n, size=k, replace=False))
    else:
        indices = [((2 * i + 1) * n) // (2 * k) for i in range(k)]
    return [entry.frames[i] for i in indices]


def anonymize_names(entries: list[ManifestEntry], seed: int) -> tuple[list[ManifestEntry], dict[str, str]]:
    """
    Replaces sample ids by random 16-hex-char tokens
    :return: renamed entries and the token -> original id map
    """
    rng = np.random.default_rng(seed)
    mapping: dict[str, str] = {}
    renamed = []
    for entry in entries:
        token = rng.bytes(TOKEN_BYTES).hex()
        while token in mapping:
            token = rng.bytes(TOKEN_BYTES).hex()
        mapping[token] = entry.sample_id
        renamed.append(entry.model_copy(update={"sample_id": token}))
    return renamed, mapping


def compute_dataset_stats(entries: list[ManifestEntry]) -> DatasetStats:
    by_label = {label.value: 0 for label in LabelEnum}
    by_split = {split.value: 0 for split in SplitEnum}
    by_label.update(Counter(e.label.value for e in entries))
    by_split.update(Counter(e.split.value for e in entries))
    by_method = dict(sorted(Counter(e.method for e in entries).items()))
    return DatasetStats(total=len(entries), by_label=by_label, by_method=by_method, by_split=by_split)


class FrameDataset(Dataset):
    """
    Frames of the selected entries as (image, label) pairs; label 1.0 is fake.
    Augmentation, when configured, is seeded by (epoch, index).
    """

    def __init__(
        self,
        entries: list[ManifestEntry],
        root: Path,
        input_size: int,
        frames_per_video: int = 15,
        seed: int = 0,
        augmentation: AugmentationConfig | None = None,
        strategy: FrameSamplingEnum = FrameSamplingEnum.UNIFORM,
    ):
        self.root = Path(root)
        self.input_size = input_size
        self.augmentation = augmentation
        self.epoch = 0
        self.items = [
            (frame, float(entry.is_fake), entry.sample_id)
            for entry in entries
            for frame in sample_frames(entry, frames_per_video, seed, strategy)
        ]

    def set_epoch(self, epoch: int) -> None:
        self.epoch = epoch

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, index: int) -> tuple[torch.Tensor, torch.Tensor]:
        frame, label, _ = self.items[index]
        image = ImageProcessor.resize_normalize(self.root / frame, self.input_size)
        if self.augmentation is not None and self.augmentation.rate > 0:
            image = augment(image, self.augmentation, seed=self.epoch * len(self.items) + index)
        return image, torch.tensor(label)


class DatasetService:
    def __init__(self, manifest_path: Path):
        self.manifest_repository = ManifestRepository(manifest_path)

    def preprocess(
        self,
        input_dir: Path,
        split: SplitSpec | None = None,
        anonymize: bool = False,
        adapter: FaceCropAdapter | None = None,
    ) -> tuple[list[ManifestEntry], DatasetStats]:
        """
        Scans ``input_dir``, assigns splits, optionally anonymizes, and writes
        the manifest (plus ``<manifest>.map.tsv`` when anonymized)
        """
        input_dir = Path(input_dir)
        entries = scan_frame_tree(input_dir, adapter)
        if split is not None:
            entries = split_dataset(entries, split)
        if anonymize:
            seed = split.seed if split is not None else 0
            entries, mapping = anonymize_names(entries, seed)
            AnonymizationMapRepository(self.map_path).write(mapping)
        manifest_dir = self.manifest_repository.path.parent.resolve()
        header = ManifestHeader(
            root=Path(os.path.relpath(input_dir.resolve(), manifest_dir)).as_posix(),
            split=split,
            anonymized=anonymize,
        )
        self.manifest_repository.write(header, entries)
        return entries, compute_dataset_stats(entries)

    @property
    def map_path(self) -> Path:
        path = self.manifest_repository.path
        return path.with_name(path.name + ".map.tsv")

    def load(self) -> tuple[ManifestHeader, list[ManifestEntry]]:
        return self.manifest_repository.read()

    def frame_root(self, header: ManifestHeader) -> Path:
        return self.manifest_repository.frame_root(header)

    def dataset(
        self,
        split: SplitEnum,
        input_size: int,
        frames_per_video: int,
        seed: int = 0,
        augmentation: AugmentationConfig | None = None,
    ) -> FrameDataset:
        header, entries = self.load()
        selected = [e for e in entries if e.split == split]
        return FrameDataset(
            selected,
            self.frame_root(header),
            input_size,
            frames_per_video=frames_per_video,
            seed=seed,
            augmentation=augmentation,
        )
